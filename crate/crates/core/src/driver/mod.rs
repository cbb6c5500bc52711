//! Range runner: splits `[start, end]` into chunks, classifies every integer
//! on worker threads, and merges results in ascending order.

mod checkpoint;

pub use checkpoint::{checkpoint_load, checkpoint_save, Checkpoint};

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith::{factorize, integer_sqrt, largest_prime_power_divisor};
use crate::genchecks::{
    certify, phase1_passes, phase2_search, prime_power_witness_from, small_case_witness,
    LeftoverRecord, Witness, WitnessKind, DEFAULT_P_DEPTH,
};
use crate::records::{leftover_line, record_n, unresolved_line, witness_line};
use crate::sieve::{
    default_smooth_bound, PrevPrimeScanner, SegmentEngine, SieveConfig, SieveError,
    DEFAULT_SEGMENT_LENGTH,
};

/// Integers below this are certified one at a time from their factorization.
pub const SIEVE_FLOOR: u64 = 1000;

/// 96 segments of the default length.
pub const DEFAULT_CHUNK_LENGTH: u64 = 96 * DEFAULT_SEGMENT_LENGTH as u64;

pub const DEFAULT_SMOOTH_MULTIPLIER: f64 = 5.0;

const MAX_END: u64 = 1 << 63;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("invalid run config: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint refused: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub start: u64,
    pub end: u64,
    pub workers: usize,
    pub chunk_length: u64,
    pub segment_length: usize,
    pub smooth_multiplier: f64,
    pub p_depth: usize,
    /// Also write phase-1 and prime-power witnesses (one line per integer).
    pub all_witnesses: bool,
    pub checkpoint: Option<PathBuf>,
    pub witnesses: Option<PathBuf>,
    pub leftovers: Option<PathBuf>,
    pub failures: Option<PathBuf>,
    /// Stop after this many chunks (counted from the resume point).
    pub max_chunks: Option<u64>,
    /// Per-chunk progress lines on stderr.
    pub progress: bool,
}

impl RunConfig {
    pub fn new(start: u64, end: u64) -> Self {
        RunConfig {
            start,
            end,
            workers: 1,
            chunk_length: DEFAULT_CHUNK_LENGTH,
            segment_length: DEFAULT_SEGMENT_LENGTH,
            smooth_multiplier: DEFAULT_SMOOTH_MULTIPLIER,
            p_depth: DEFAULT_P_DEPTH,
            all_witnesses: false,
            checkpoint: None,
            witnesses: None,
            leftovers: None,
            failures: None,
            max_chunks: None,
            progress: false,
        }
    }

    pub fn validate(&self) -> Result<(), DriverError> {
        let fail = |msg: String| Err(DriverError::Config(msg));
        if !(5 <= self.start && self.start <= self.end && self.end <= MAX_END) {
            return fail(format!("need 5 <= start <= end <= 2^63, got [{}, {}]", self.start, self.end));
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        if self.segment_length == 0 || self.chunk_length == 0 {
            return fail("segment and chunk lengths must be positive".into());
        }
        if self.chunk_length % self.segment_length as u64 != 0 {
            return fail(format!(
                "chunk length {} is not a multiple of segment length {}",
                self.chunk_length, self.segment_length
            ));
        }
        if !(self.smooth_multiplier.is_finite() && self.smooth_multiplier > 0.0) {
            return fail("smooth multiplier must be positive".into());
        }
        if self.p_depth == 0 {
            return fail("p depth must be at least 1".into());
        }
        self.sieve_config().map(|_| ())
    }

    pub fn smooth_bound(&self) -> u64 {
        default_smooth_bound(self.end, self.smooth_multiplier)
    }

    fn sieve_config(&self) -> Result<SieveConfig, DriverError> {
        Ok(SieveConfig::new(self.start, self.end, self.segment_length, self.smooth_bound())?)
    }

    /// Hex digest of every setting that affects output; worker count and
    /// paths are excluded.
    pub fn config_hash(&self) -> String {
        let canonical = format!(
            "start={};end={};chunk={};segment={};mult={:016x};depth={};all={}",
            self.start,
            self.end,
            self.chunk_length,
            self.segment_length,
            self.smooth_multiplier.to_bits(),
            self.p_depth,
            self.all_witnesses
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..16].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn chunk_count(&self) -> u64 {
        (self.end - self.start) / self.chunk_length + 1
    }

    fn chunk_bounds(&self, index: u64) -> (u64, u64) {
        let lo = self.start + index * self.chunk_length;
        (lo, (lo + self.chunk_length - 1).min(self.end))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub integers_processed: u64,
    pub phase1_passes: u64,
    /// Prime powers, including the two certified by the small-case table.
    pub prime_powers: u64,
    pub leftovers: u64,
    pub small_case_witnesses: u64,
    pub phase2_witnesses: u64,
    pub escalations: u64,
    pub non_smooth_leftover_warnings: u64,
    pub overlap_widenings: u64,
    pub unresolved_count: u64,
    pub wall_time: Duration,
}

impl RunStats {
    pub const COUNTER_NAMES: [&'static str; 10] = [
        "integers_processed",
        "phase1_passes",
        "prime_powers",
        "leftovers",
        "small_case_witnesses",
        "phase2_witnesses",
        "escalations",
        "non_smooth_leftover_warnings",
        "overlap_widenings",
        "unresolved_count",
    ];

    pub fn counters(&self) -> [(&'static str, u64); 10] {
        Self::COUNTER_NAMES.map(|name| (name, self.counter(name)))
    }

    fn counter(&self, name: &str) -> u64 {
        match name {
            "integers_processed" => self.integers_processed,
            "phase1_passes" => self.phase1_passes,
            "prime_powers" => self.prime_powers,
            "leftovers" => self.leftovers,
            "small_case_witnesses" => self.small_case_witnesses,
            "phase2_witnesses" => self.phase2_witnesses,
            "escalations" => self.escalations,
            "non_smooth_leftover_warnings" => self.non_smooth_leftover_warnings,
            "overlap_widenings" => self.overlap_widenings,
            "unresolved_count" => self.unresolved_count,
            other => panic!("unknown counter {other}"),
        }
    }

    pub(crate) fn counter_mut(&mut self, name: &str) -> &mut u64 {
        match name {
            "integers_processed" => &mut self.integers_processed,
            "phase1_passes" => &mut self.phase1_passes,
            "prime_powers" => &mut self.prime_powers,
            "leftovers" => &mut self.leftovers,
            "small_case_witnesses" => &mut self.small_case_witnesses,
            "phase2_witnesses" => &mut self.phase2_witnesses,
            "escalations" => &mut self.escalations,
            "non_smooth_leftover_warnings" => &mut self.non_smooth_leftover_warnings,
            "overlap_widenings" => &mut self.overlap_widenings,
            "unresolved_count" => &mut self.unresolved_count,
            other => panic!("unknown counter {other}"),
        }
    }

    fn absorb(&mut self, other: &RunStats) {
        for name in Self::COUNTER_NAMES {
            *self.counter_mut(name) += other.counter(name);
        }
    }

    /// Every integer is a prime power, a phase-1 pass or a leftover, and
    /// every leftover is resolved by the table, by phase 2, or not at all.
    pub fn is_consistent(&self) -> bool {
        self.phase1_passes + self.prime_powers + self.leftovers == self.integers_processed
            && self.leftovers >= self.phase2_witnesses + self.unresolved_count
    }
}

#[derive(Debug, Default)]
struct ChunkOutput {
    witnesses: String,
    leftovers: String,
    failures: String,
    stats: RunStats,
}

impl ChunkOutput {
    fn emit(&mut self, w: &Witness) {
        self.witnesses.push_str(&witness_line(w));
    }

    fn unresolved(&mut self, n: u64) {
        self.stats.unresolved_count += 1;
        self.failures.push_str(&unresolved_line(n));
    }

    /// Phase-2 dispatch for an integer that failed phase 1.
    fn leftover(&mut self, rec: LeftoverRecord, depth: usize) {
        self.stats.leftovers += 1;
        self.leftovers.push_str(&leftover_line(&rec));
        if !rec.smooth {
            self.stats.non_smooth_leftover_warnings += 1;
        }
        if let Some(w) = small_case_witness(rec.n) {
            self.stats.small_case_witnesses += 1;
            self.emit(&w);
            return;
        }
        let found = phase2_search(rec.n, &factorize(rec.n), depth);
        if found.escalated {
            self.stats.escalations += 1;
        }
        match found.witness {
            Some(w) => {
                self.stats.phase2_witnesses += 1;
                self.emit(&w);
            }
            None => self.unresolved(rec.n),
        }
    }
}

/// Outcome of re-running phase 2 on one leftover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeftoverResolution {
    pub n: u64,
    pub witness: Option<Witness>,
    pub escalated: bool,
}

/// Certifies a stored leftover without any sieve data.
pub fn resolve_leftover(n: u64, depth: usize) -> LeftoverResolution {
    if let Some(w) = small_case_witness(n) {
        return LeftoverResolution { n, witness: Some(w), escalated: false };
    }
    let found = phase2_search(n, &factorize(n), depth);
    LeftoverResolution { n, witness: found.witness, escalated: found.escalated }
}

struct Worker<'a> {
    cfg: &'a RunConfig,
    sieve: &'a SieveConfig,
    engine: SegmentEngine<'a>,
    basis: &'a [u64],
}

impl<'a> Worker<'a> {
    fn process(&mut self, lo: u64, hi: u64) -> Result<ChunkOutput, DriverError> {
        let mut out = ChunkOutput::default();
        out.stats.integers_processed = hi - lo + 1;
        for n in lo..=hi.min(SIEVE_FLOOR - 1) {
            self.single(n, &mut out);
        }
        let sieve_lo = lo.max(SIEVE_FLOOR);
        if sieve_lo <= hi {
            self.sieved(sieve_lo, hi, &mut out)?;
        }
        Ok(out)
    }

    /// Per-integer path with exact factorization.
    fn single(&self, n: u64, out: &mut ChunkOutput) {
        let bound = self.sieve.smooth_bound();
        let cert = certify(n, self.cfg.p_depth).expect("n >= 5");
        let Some(w) = cert.witness else {
            // certify only returns no witness for unresolved leftovers
            out.stats.leftovers += 1;
            out.unresolved(n);
            return;
        };
        if cert.leftover {
            let lppd = largest_prime_power_divisor(&factorize(n)).expect("n > 1").value;
            let smooth = lppd <= bound;
            let rec = LeftoverRecord { n, lppd: if smooth { lppd } else { bound }, smooth };
            out.stats.leftovers += 1;
            out.leftovers.push_str(&leftover_line(&rec));
            if !smooth {
                out.stats.non_smooth_leftover_warnings += 1;
            }
            if cert.escalated {
                out.stats.escalations += 1;
            }
        }
        match w.kind {
            WitnessKind::SmallCase => {
                out.stats.small_case_witnesses += 1;
                if !cert.leftover {
                    out.stats.prime_powers += 1;
                }
                out.emit(&w);
            }
            WitnessKind::PrimePower => {
                out.stats.prime_powers += 1;
                if self.cfg.all_witnesses {
                    out.emit(&w);
                }
            }
            WitnessKind::Phase1 => {
                out.stats.phase1_passes += 1;
                if self.cfg.all_witnesses {
                    out.emit(&w);
                }
            }
            WitnessKind::Phase2 { .. } => {
                out.stats.phase2_witnesses += 1;
                out.emit(&w);
            }
        }
    }

    /// Prime powers `p^a` with `a >= 2` in `[lo, hi]`, ascending.
    fn higher_prime_powers(&self, lo: u64, hi: u64) -> Vec<(u64, u64, u32)> {
        let mut found = Vec::new();
        let root = integer_sqrt(hi);
        for &p in self.basis.iter().take_while(|&&p| p <= root) {
            let mut value = p * p;
            let mut a = 2;
            while value <= hi {
                if value >= lo {
                    found.push((value, p, a));
                }
                match value.checked_mul(p) {
                    Some(v) => value = v,
                    None => break,
                }
                a += 1;
            }
        }
        found.sort_unstable();
        found
    }

    fn scanner(&self, lo: u64, out: &mut ChunkOutput) -> Result<PrevPrimeScanner, DriverError> {
        let mut overlap = self.sieve.smooth_bound();
        loop {
            match PrevPrimeScanner::start(self.sieve, lo, overlap) {
                Ok(scanner) => return Ok(scanner),
                Err(SieveError::OverlapExhausted { lo: window_lo, .. }) if window_lo > 2 => {
                    out.stats.overlap_widenings += 1;
                    overlap *= 2;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    fn sieved(&mut self, lo: u64, hi: u64, out: &mut ChunkOutput) -> Result<(), DriverError> {
        let depth = self.cfg.p_depth;
        let all = self.cfg.all_witnesses;
        let powers = self.higher_prime_powers(lo, hi);
        let mut next_power = powers.iter().peekable();
        let mut scanner = self.scanner(lo, out)?;
        let segment = self.sieve.segment_length() as u64;
        let mut base = lo;
        while base <= hi {
            let scan = self.engine.scan(base);
            let last = (base + scan.len() as u64 - 1).min(hi);
            for i in 0..=(last - base) as usize {
                let n = base + i as u64;
                let prime = scan.is_prime[i];
                let r = scanner.step(n, prime);
                let power = if prime {
                    Some((n, 1))
                } else if next_power.peek().is_some_and(|&&(m, ..)| m == n) {
                    next_power.next().map(|&(_, p, a)| (p, a))
                } else {
                    None
                };
                if let Some((p, a)) = power {
                    out.stats.prime_powers += 1;
                    match prime_power_witness_from(n, p, a, scanner.below_last_step()) {
                        Some(w) if all => out.emit(&w),
                        Some(_) => {}
                        None => {
                            out.stats.leftovers += 1;
                            out.stats.prime_powers -= 1;
                            out.unresolved(n);
                        }
                    }
                    continue;
                }
                let lppd = scan.lppd[i] as u64;
                let smooth = scan.smooth[i];
                if phase1_passes(n, r, lppd) {
                    out.stats.phase1_passes += 1;
                    if all {
                        let pp = if smooth {
                            crate::arith::prime_power_parts(lppd).expect("lppd is a prime power")
                        } else {
                            let exact = largest_prime_power_divisor(&factorize(n)).expect("n > 1");
                            (exact.p, exact.a)
                        };
                        out.emit(&Witness { n, kind: WitnessKind::Phase1, r, p: pp.0, a: pp.1 });
                    }
                } else {
                    out.leftover(LeftoverRecord { n, lppd, smooth }, depth);
                }
            }
            base += segment;
        }
        Ok(())
    }
}

struct Outputs {
    witnesses: Option<BufWriter<File>>,
    leftovers: Option<BufWriter<File>>,
    failures: Option<BufWriter<File>>,
}

impl Outputs {
    /// Opens each output, keeping only complete lines with `n < keep_below`.
    fn open(cfg: &RunConfig, keep_below: Option<u64>) -> Result<Self, DriverError> {
        let open = |path: &Option<PathBuf>| -> Result<Option<BufWriter<File>>, DriverError> {
            let Some(path) = path else { return Ok(None) };
            if let Some(bound) = keep_below {
                truncate_records(path, bound)?;
                let file = OpenOptions::new().append(true).create(true).open(path)?;
                Ok(Some(BufWriter::new(file)))
            } else {
                Ok(Some(BufWriter::new(File::create(path)?)))
            }
        };
        Ok(Outputs {
            witnesses: open(&cfg.witnesses)?,
            leftovers: open(&cfg.leftovers)?,
            failures: open(&cfg.failures)?,
        })
    }

    fn write(&mut self, chunk: &ChunkOutput) -> Result<(), DriverError> {
        for (writer, text) in [
            (&mut self.witnesses, &chunk.witnesses),
            (&mut self.leftovers, &chunk.leftovers),
            (&mut self.failures, &chunk.failures),
        ] {
            if let Some(w) = writer {
                w.write_all(text.as_bytes())?;
                w.flush()?;
            }
        }
        Ok(())
    }
}

/// Drops every line at or past `bound`, and any unterminated trailing line.
fn truncate_records(path: &Path, bound: u64) -> Result<(), DriverError> {
    if !path.exists() {
        return Ok(());
    }
    let mut reader = BufReader::new(File::open(path)?);
    let mut kept = String::new();
    let mut line = String::new();
    while reader.read_line(&mut line)? > 0 {
        if !line.ends_with('\n') {
            break;
        }
        let n = record_n(line.trim_end()).ok_or_else(|| {
            DriverError::Checkpoint(format!("{}: unreadable record {:?}", path.display(), line.trim_end()))
        })?;
        if n >= bound {
            break;
        }
        kept.push_str(&line);
        line.clear();
    }
    fs::write(path, kept)?;
    Ok(())
}

/// Classifies every integer in `[cfg.start, cfg.end]`, writing records to the
/// configured outputs. Resumes from `cfg.checkpoint` when that file exists.
pub fn run_range(cfg: &RunConfig) -> Result<RunStats, DriverError> {
    let clock = Instant::now();
    cfg.validate()?;
    let sieve = cfg.sieve_config()?;
    let hash = cfg.config_hash();

    let mut stats = RunStats::default();
    let mut first_chunk = 0;
    let resume = match &cfg.checkpoint {
        Some(path) if path.exists() => Some(checkpoint_load(path)?),
        _ => None,
    };
    if let Some(ckpt) = &resume {
        if ckpt.config_hash != hash {
            return Err(DriverError::Checkpoint("config hash does not match this run".into()));
        }
        let done = ckpt.completed_upper_bound;
        let aligned = done > cfg.start
            && ((done - cfg.start) % cfg.chunk_length == 0 || done == cfg.end + 1)
            && done <= cfg.end + 1;
        if !aligned {
            return Err(DriverError::Checkpoint(format!("bound {done} is not a chunk boundary")));
        }
        first_chunk = (done - cfg.start).div_ceil(cfg.chunk_length);
        stats = ckpt.stats.clone();
    }
    let mut outputs = Outputs::open(cfg, resume.as_ref().map(|c| c.completed_upper_bound))?;

    let total = cfg.chunk_count();
    let stop_at = match cfg.max_chunks {
        Some(m) => total.min(first_chunk + m),
        None => total,
    };
    if first_chunk >= stop_at {
        stats.wall_time = clock.elapsed();
        return Ok(stats);
    }

    let queue = AtomicU64::new(first_chunk);
    let abort = AtomicBool::new(false);
    let workers = cfg.workers.min((stop_at - first_chunk) as usize);
    let result = std::thread::scope(|scope| -> Result<(), DriverError> {
        let (tx, rx) = mpsc::channel::<(u64, Result<ChunkOutput, DriverError>)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (queue, abort, sieve) = (&queue, &abort, &sieve);
            scope.spawn(move || {
                let mut worker = Worker {
                    cfg,
                    sieve,
                    engine: SegmentEngine::new(sieve),
                    basis: sieve.basis_primes(),
                };
                loop {
                    if abort.load(Ordering::Relaxed) {
                        break;
                    }
                    let index = queue.fetch_add(1, Ordering::Relaxed);
                    if index >= stop_at {
                        break;
                    }
                    let (lo, hi) = cfg.chunk_bounds(index);
                    if tx.send((index, worker.process(lo, hi))).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        let mut next = first_chunk;
        for (index, output) in rx {
            match output {
                Ok(chunk) => pending.insert(index, chunk),
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    return Err(e);
                }
            };
            while let Some(chunk) = pending.remove(&next) {
                if let Err(e) = flush_chunk(cfg, &hash, &mut outputs, &mut stats, &chunk, next) {
                    abort.store(true, Ordering::Relaxed);
                    return Err(e);
                }
                next += 1;
            }
        }
        Ok(())
    });
    result?;
    stats.wall_time = clock.elapsed();
    Ok(stats)
}

fn flush_chunk(
    cfg: &RunConfig,
    hash: &str,
    outputs: &mut Outputs,
    stats: &mut RunStats,
    chunk: &ChunkOutput,
    index: u64,
) -> Result<(), DriverError> {
    outputs.write(chunk)?;
    stats.absorb(&chunk.stats);
    let (_, hi) = cfg.chunk_bounds(index);
    if let Some(path) = &cfg.checkpoint {
        let ckpt = Checkpoint { config_hash: hash.to_owned(), completed_upper_bound: hi + 1, stats: stats.clone() };
        checkpoint_save(path, &ckpt)?;
    }
    if cfg.progress {
        eprintln!(
            "done through {hi}: {} leftovers, {} unresolved",
            stats.leftovers, stats.unresolved_count
        );
    }
    Ok(())
}
