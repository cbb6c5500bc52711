use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use altgen_core::driver::{
    resolve_leftover, run_range, DriverError, RunConfig, RunStats, DEFAULT_CHUNK_LENGTH,
    DEFAULT_SMOOTH_MULTIPLIER,
};
use altgen_core::genchecks::{binomial_cover, certify, verify_witness, DEFAULT_P_DEPTH};
use altgen_core::records::{parse_leftover, parse_witness, read_records, witness_line};
use altgen_core::sieve::DEFAULT_SEGMENT_LENGTH;

const OK: u8 = 0;
const UNRESOLVED: u8 = 1;
const USAGE: u8 = 2;
const INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "altgen", version, about = "Certify invariable generation of A_n over integer ranges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every n in [start, end] and write certificates.
    Verify(VerifyArgs),
    /// Re-run phase 2 on a saved leftover file.
    Phase2 {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_P_DEPTH)]
        p_depth: usize,
        /// Witness output (stdout when omitted).
        #[arg(long)]
        witnesses: Option<PathBuf>,
    },
    /// Full certificate for a single n from its exact factorization.
    Witness {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_P_DEPTH)]
        p_depth: usize,
    },
    /// Re-verify every record in a witness file.
    Check {
        #[arg(long)]
        input: PathBuf,
    },
    /// Whether every nontrivial C(n, k) is divisible by p or r.
    Cover {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: u64,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    start: u64,
    #[arg(long)]
    end: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = DEFAULT_CHUNK_LENGTH)]
    chunk_length: u64,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_LENGTH)]
    segment_length: usize,
    #[arg(long, default_value_t = DEFAULT_SMOOTH_MULTIPLIER)]
    smooth_mult: f64,
    #[arg(long, default_value_t = DEFAULT_P_DEPTH)]
    p_depth: usize,
    #[arg(long)]
    witnesses: Option<PathBuf>,
    #[arg(long)]
    leftovers: Option<PathBuf>,
    /// Unresolved integers, one record per line.
    #[arg(long)]
    failures: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Also write phase-1 and prime-power witnesses.
    #[arg(long)]
    all_witnesses: bool,
    /// Stop after this many chunks; resume later from the checkpoint.
    #[arg(long)]
    max_chunks: Option<u64>,
    #[arg(long)]
    progress: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let code = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Phase2 { input, p_depth, witnesses } => phase2(input, p_depth, witnesses),
        Command::Witness { n, p_depth } => witness(n, p_depth),
        Command::Check { input } => check(input),
        Command::Cover { n, p, r } => cover(n, p, r),
    };
    ExitCode::from(code)
}

fn print_stats(stats: &RunStats) {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (name, value) in stats.counters() {
        let _ = writeln!(out, "{name}: {value}");
    }
    let _ = writeln!(out, "wall_time_secs: {:.3}", stats.wall_time.as_secs_f64());
}

fn verify(args: VerifyArgs) -> u8 {
    let cfg = RunConfig {
        start: args.start,
        end: args.end,
        workers: args.workers,
        chunk_length: args.chunk_length,
        segment_length: args.segment_length,
        smooth_multiplier: args.smooth_mult,
        p_depth: args.p_depth,
        all_witnesses: args.all_witnesses,
        checkpoint: args.checkpoint,
        witnesses: args.witnesses,
        leftovers: args.leftovers,
        failures: args.failures,
        max_chunks: args.max_chunks,
        progress: args.progress,
    };
    let stats = match run_range(&cfg) {
        Ok(stats) => stats,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                DriverError::Sieve(_) => INVARIANT,
                _ => USAGE,
            };
        }
    };
    if stats.non_smooth_leftover_warnings > 0 {
        eprintln!(
            "warning: {} leftovers were not {}-power-smooth",
            stats.non_smooth_leftover_warnings,
            cfg.smooth_bound()
        );
    }
    if stats.overlap_widenings > 0 {
        eprintln!("warning: previous-prime window widened {} times", stats.overlap_widenings);
    }
    print_stats(&stats);
    if !stats.is_consistent() {
        eprintln!("error: run counters are inconsistent");
        return INVARIANT;
    }
    if stats.unresolved_count > 0 {
        UNRESOLVED
    } else {
        OK
    }
}

fn open_input(path: &PathBuf) -> Result<BufReader<File>, u8> {
    File::open(path).map(BufReader::new).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        USAGE
    })
}

fn phase2(input: PathBuf, depth: usize, witnesses: Option<PathBuf>) -> u8 {
    let reader = match open_input(&input) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let sink: Box<dyn Write> = match &witnesses {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(f),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return USAGE;
            }
        },
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    let mut code = OK;
    for record in read_records(reader, parse_leftover) {
        let rec = match record {
            Ok((_, rec)) => rec,
            Err(e) => {
                eprintln!("error: {}: {e}", input.display());
                return USAGE;
            }
        };
        let found = resolve_leftover(rec.n, depth);
        match found.witness {
            Some(w) => {
                if sink.write_all(witness_line(&w).as_bytes()).is_err() {
                    return USAGE;
                }
            }
            None => {
                eprintln!("unresolved: {}", rec.n);
                code = UNRESOLVED;
            }
        }
    }
    if sink.flush().is_err() {
        return USAGE;
    }
    code
}

fn witness(n: u64, depth: usize) -> u8 {
    match certify(n, depth) {
        Ok(cert) => match cert.witness {
            Some(w) => {
                print!("{}", witness_line(&w));
                OK
            }
            None => {
                eprintln!("unresolved: {n}");
                UNRESOLVED
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            USAGE
        }
    }
}

fn check(input: PathBuf) -> u8 {
    let reader = match open_input(&input) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let (mut passed, mut failed) = (0u64, 0u64);
    let mut last_n = None;
    for record in read_records(reader, parse_witness) {
        let (line, w) = match record {
            Ok(pair) => pair,
            Err(e) => {
                eprintln!("FAIL {e}");
                failed += 1;
                continue;
            }
        };
        if last_n.is_some_and(|prev| prev >= w.n) {
            eprintln!("FAIL line {line}: n = {} is out of order", w.n);
            failed += 1;
            continue;
        }
        last_n = Some(w.n);
        match verify_witness(&w) {
            Ok(true) => passed += 1,
            Ok(false) => {
                eprintln!("FAIL line {line}: n = {} {} witness does not verify", w.n, w.kind.name());
                failed += 1;
            }
            Err(e) => {
                eprintln!("FAIL line {line}: {e}");
                failed += 1;
            }
        }
    }
    println!("verified: {passed}");
    println!("failed: {failed}");
    if failed > 0 {
        INVARIANT
    } else {
        OK
    }
}

fn cover(n: u64, p: u64, r: u64) -> u8 {
    match binomial_cover(n, p, r) {
        Ok(true) => {
            println!("true");
            OK
        }
        Ok(false) => {
            println!("false");
            UNRESOLVED
        }
        Err(e) => {
            eprintln!("error: {e}");
            USAGE
        }
    }
}
