//! Segmented sieve producing, per integer, primality, the largest prime-power
//! divisor when the integer is `B`-power-smooth, and a smoothness flag.
//!
//! Smoothness uses a residual array: each slot starts at `n`, every prime
//! `p <= B` divides its full `p`-part out, and a slot is smooth when the
//! residual reaches 1 with no `p`-part above `B`. Non-smooth slots report `B`
//! as a lower bound for their largest prime-power divisor.

use bitvec::prelude::*;
use thiserror::Error;

use crate::arith::{integer_sqrt, primes_up_to, ExactDivisor};

pub type Bits = BitVec<u64, Lsb0>;

/// Default number of integers per segment.
pub const DEFAULT_SEGMENT_LENGTH: usize = 1 << 20;

const MIN_SMOOTH_BOUND: u64 = 64;

/// Slots per cache block in the smooth scan.
const SMOOTH_BLOCK: usize = 1 << 14;
const MAX_RANGE_END: u64 = 1 << 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error("invalid sieve config: {0}")]
    InvalidConfig(String),
    #[error("no two primes found in window [{lo}, {hi}]")]
    OverlapExhausted { lo: u64, hi: u64 },
}

/// `floor(multiplier * (log2 m)^2)`, at least 64.
pub fn default_smooth_bound(range_end: u64, multiplier: f64) -> u64 {
    let log = (range_end.max(2) as f64).log2();
    ((multiplier * log * log).floor() as u64).max(MIN_SMOOTH_BOUND)
}

#[derive(Debug, Clone)]
pub struct SieveConfig {
    range_start: u64,
    range_end: u64,
    segment_length: usize,
    smooth_bound: u64,
    basis_primes: Vec<u64>,
    /// Primes `<= smooth_bound`; odd ones carry exact-division data.
    smooth_primes: Vec<SmoothPrime>,
}

#[derive(Debug, Clone, Copy)]
struct SmoothPrime {
    p: u64,
    divisor: Option<ExactDivisor>,
}

impl SieveConfig {
    pub fn new(
        range_start: u64,
        range_end: u64,
        segment_length: usize,
        smooth_bound: u64,
    ) -> Result<Self, SieveError> {
        if !(5 <= range_start && range_start <= range_end && range_end <= MAX_RANGE_END) {
            return Err(SieveError::InvalidConfig(format!(
                "need 5 <= start <= end <= 2^63, got [{range_start}, {range_end}]"
            )));
        }
        if smooth_bound < MIN_SMOOTH_BOUND || smooth_bound > segment_length as u64 {
            return Err(SieveError::InvalidConfig(format!(
                "smooth bound {smooth_bound} must lie in [64, segment_length = {segment_length}]"
            )));
        }
        if smooth_bound > u32::MAX as u64 {
            return Err(SieveError::InvalidConfig(format!(
                "smooth bound {smooth_bound} exceeds 32 bits"
            )));
        }
        let basis_primes = primes_up_to(integer_sqrt(range_end));
        let smooth_primes = primes_up_to(smooth_bound)
            .into_iter()
            .map(|p| SmoothPrime { p, divisor: (p != 2).then(|| ExactDivisor::new(p)) })
            .collect();
        Ok(SieveConfig {
            range_start,
            range_end,
            segment_length,
            smooth_bound,
            basis_primes,
            smooth_primes,
        })
    }

    pub fn with_defaults(range_start: u64, range_end: u64) -> Result<Self, SieveError> {
        Self::new(
            range_start,
            range_end,
            DEFAULT_SEGMENT_LENGTH,
            default_smooth_bound(range_end, 5.0),
        )
    }

    pub fn range_start(&self) -> u64 {
        self.range_start
    }

    pub fn range_end(&self) -> u64 {
        self.range_end
    }

    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    pub fn smooth_bound(&self) -> u64 {
        self.smooth_bound
    }

    pub fn basis_primes(&self) -> &[u64] {
        &self.basis_primes
    }

    /// Length of the segment starting at `base`, truncated at `range_end`.
    fn len_at(&self, base: u64) -> usize {
        debug_assert!(base <= self.range_end);
        (self.range_end - base + 1).min(self.segment_length as u64) as usize
    }
}

/// Per-segment output of the engine.
#[derive(Debug, Clone, Default)]
pub struct SegmentScan {
    pub base: u64,
    pub is_prime: Bits,
    /// Exact largest prime-power divisor when smooth, else the smooth bound.
    pub lppd: Vec<u32>,
    pub smooth: Bits,
}

impl SegmentScan {
    pub fn len(&self) -> usize {
        self.lppd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lppd.is_empty()
    }

    /// `(is_prime, lppd, smooth)` for the integer `n` in this segment.
    pub fn entry(&self, n: u64) -> (bool, u64, bool) {
        let i = (n - self.base) as usize;
        (self.is_prime[i], self.lppd[i] as u64, self.smooth[i])
    }
}

/// Marks primes in `[lo, lo + len)` using every basis prime up to its square root.
fn mark_primes(basis: &[u64], lo: u64, len: usize, flags: &mut Bits) {
    fill_true(flags, len);
    for i in 0..len.min(2u64.saturating_sub(lo) as usize) {
        flags.set(i, false);
    }
    let hi = lo + len as u64;
    let words = flags.as_raw_mut_slice();
    for &p in basis {
        let sq = p * p;
        if sq >= hi {
            break;
        }
        let first = sq.max(lo.div_ceil(p) * p);
        for idx in ((first - lo) as usize..len).step_by(p as usize) {
            words[idx >> 6] &= !(1u64 << (idx & 63));
        }
    }
}

/// Resets `flags` to `len` set bits.
fn fill_true(flags: &mut Bits, len: usize) {
    *flags = Bits::repeat(true, len);
}

/// Primality flags for the segment starting at `base`.
pub fn sieve_primality(cfg: &SieveConfig, base: u64) -> Bits {
    let mut flags = Bits::new();
    mark_primes(&cfg.basis_primes, base, cfg.len_at(base), &mut flags);
    flags
}

/// Primality flags for an arbitrary window `[lo, hi]` with `hi <= range_end`.
pub fn sieve_window(cfg: &SieveConfig, lo: u64, hi: u64) -> Bits {
    assert!(lo <= hi && hi <= cfg.range_end);
    let mut flags = Bits::new();
    mark_primes(&cfg.basis_primes, lo, (hi - lo + 1) as usize, &mut flags);
    flags
}

/// `(lppd, smooth)` for the segment starting at `base`.
pub fn scan_power_smooth(cfg: &SieveConfig, base: u64) -> (Vec<u32>, Bits) {
    let mut engine = SegmentEngine::new(cfg);
    let scan = engine.scan(base);
    (scan.lppd.clone(), scan.smooth.clone())
}

/// Reusable per-worker buffers.
#[derive(Debug)]
pub struct SegmentEngine<'a> {
    cfg: &'a SieveConfig,
    residual: Vec<u64>,
    scan: SegmentScan,
}

impl<'a> SegmentEngine<'a> {
    pub fn new(cfg: &'a SieveConfig) -> Self {
        SegmentEngine { cfg, residual: Vec::new(), scan: SegmentScan::default() }
    }

    pub fn config(&self) -> &SieveConfig {
        self.cfg
    }

    /// Full scan of the segment starting at `base` (`range_start <= base <= range_end`
    /// is not required; any `base >= 2` with `base <= range_end` works).
    pub fn scan(&mut self, base: u64) -> &SegmentScan {
        assert!(base >= 2 && base <= self.cfg.range_end);
        let len = self.cfg.len_at(base);
        self.scan.base = base;
        mark_primes(&self.cfg.basis_primes, base, len, &mut self.scan.is_prime);
        self.scan_smooth(base, len);
        &self.scan
    }

    fn scan_smooth(&mut self, base: u64, len: usize) {
        let bound = self.cfg.smooth_bound;
        // The 2-part comes straight from the trailing zeros.
        self.residual.resize(len, 0);
        let lppd = &mut self.scan.lppd;
        lppd.resize(len, 0);
        for ((res, slot), n) in self.residual.iter_mut().zip(lppd.iter_mut()).zip(base..) {
            let tz = n.trailing_zeros();
            *res = n >> tz;
            let two = 1u64 << tz;
            *slot = if two > bound { u32::MAX } else { two as u32 };
        }
        // Cache-sized blocks keep the residual and lppd slices resident.
        for block_lo in (0..len).step_by(SMOOTH_BLOCK) {
            let block_len = SMOOTH_BLOCK.min(len - block_lo);
            let block_base = base + block_lo as u64;
            let residual = &mut self.residual[block_lo..block_lo + block_len];
            let block_lppd = &mut lppd[block_lo..block_lo + block_len];
            let last = block_base + block_len as u64 - 1;
            for sp in &self.cfg.smooth_primes {
                let Some(d) = sp.divisor else { continue };
                let p = sp.p;
                let mut pk = p;
                // Stopping at pk > bound leaves a factor p in those residuals.
                while pk <= bound {
                    let first = block_base.div_ceil(pk) * pk;
                    if first > last {
                        break;
                    }
                    let step = pk as usize;
                    let start = (first - block_base) as usize;
                    let q = pk as u32;
                    let slots = residual[start..].iter_mut().step_by(step);
                    for (res, best) in slots.zip(block_lppd[start..].iter_mut().step_by(step)) {
                        *res = d.divide_exact(*res);
                        *best = (*best).max(q);
                    }
                    pk *= p;
                }
            }
        }

        // Smooth iff the residual is 1 and the 2-part fits under the bound.
        let bound32 = bound as u32;
        let smooth = &mut self.scan.smooth;
        *smooth = Bits::repeat(false, len);
        let words = smooth.as_raw_mut_slice();
        for ((word, res), slots) in words.iter_mut().zip(self.residual.chunks(64)).zip(lppd.chunks_mut(64)) {
            let mut bits = 0u64;
            for (bit, (&r, slot)) in res.iter().zip(slots.iter_mut()).enumerate() {
                let keep = (r == 1) & (*slot != u32::MAX);
                bits |= (keep as u64) << bit;
                *slot = if keep { *slot } else { bound32 };
            }
            *word = bits;
        }
    }
}

/// Tracks, for ascending `n`, the largest prime `<= n - 2` and the largest
/// prime `<= n - 3`.
#[derive(Debug, Clone)]
pub struct PrevPrimeScanner {
    cursor: u64,
    /// Largest prime `<= cursor - 2`.
    last: u64,
    /// Largest prime `< last`.
    before_last: u64,
    /// Primality of `cursor - 1`.
    pending: bool,
    /// Largest prime `<= n - 3` for the most recent step.
    below: u64,
}

impl PrevPrimeScanner {
    /// Sieves the window `[start - 2 - overlap, start - 1]` to seed the scan at `start`.
    pub fn start(cfg: &SieveConfig, start: u64, overlap: u64) -> Result<Self, SieveError> {
        assert!(start >= 5);
        let lo = start.saturating_sub(2 + overlap).max(2);
        let hi = start - 1;
        let flags = sieve_window(cfg, lo, hi);
        let pending = flags[(hi - lo) as usize];
        let mut primes = (lo..=start - 2).rev().filter(|&m| flags[(m - lo) as usize]);
        match (primes.next(), primes.next()) {
            (Some(last), Some(before_last)) => Ok(PrevPrimeScanner {
                cursor: start,
                last,
                before_last,
                pending,
                below: 0,
            }),
            _ => Err(SieveError::OverlapExhausted { lo, hi: start - 2 }),
        }
    }

    /// The next integer the scanner expects.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Advances to `n` (which must equal the cursor) and returns the largest
    /// prime `<= n - 2`.
    #[inline]
    pub fn step(&mut self, n: u64, n_is_prime: bool) -> u64 {
        debug_assert_eq!(n, self.cursor);
        let r = self.last;
        self.below = if r == n - 2 { self.before_last } else { r };
        if self.pending {
            self.before_last = self.last;
            self.last = n - 1;
        }
        self.pending = n_is_prime;
        self.cursor = n + 1;
        r
    }

    /// Largest prime `<= n - 3` for the `n` most recently passed to [`step`](Self::step).
    #[inline]
    pub fn below_last_step(&self) -> u64 {
        self.below
    }

    /// `(n, largest prime <= n - 2)` for each `n` in the scanned segment.
    pub fn pairs<'s>(&'s mut self, scan: &'s SegmentScan) -> impl Iterator<Item = (u64, u64)> + 's {
        (0..scan.len()).map(move |i| {
            let n = scan.base + i as u64;
            (n, self.step(n, scan.is_prime[i]))
        })
    }
}
