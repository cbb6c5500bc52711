//! Shared inputs for the benchmarks.

use altgen_core::genchecks::{phase1_check, Phase1Outcome};
use altgen_core::sieve::{PrevPrimeScanner, SegmentEngine, SieveConfig};

/// The first `count` phase-1 leftovers at or above `start` (`start >= 1000`).
pub fn leftovers_from(start: u64, count: usize) -> Vec<u64> {
    let end = start + (1 << 24);
    let cfg = SieveConfig::with_defaults(start, end).expect("valid range");
    let mut engine = SegmentEngine::new(&cfg);
    let mut scanner = PrevPrimeScanner::start(&cfg, start, cfg.smooth_bound() * 4).expect("primes nearby");
    let mut found = Vec::with_capacity(count);
    let mut base = start;
    while found.len() < count && base <= end {
        let scan = engine.scan(base);
        for i in 0..scan.len() {
            let n = scan.base + i as u64;
            let r = scanner.step(n, scan.is_prime[i]);
            if scan.is_prime[i] || altgen_core::arith::is_prime_power(n) {
                continue;
            }
            let (_, lppd, smooth) = scan.entry(n);
            if let Phase1Outcome::Leftover(_) = phase1_check(n, r, lppd, smooth) {
                found.push(n);
                if found.len() == count {
                    break;
                }
            }
        }
        base += cfg.segment_length() as u64;
    }
    found
}
