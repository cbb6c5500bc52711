//! Decision procedures certifying that `A_n` is invariably generated by an
//! element of prime order `r` and an element of prime-power order.
//!
//! Certificates come in four kinds:
//!
//! * **small-case**: a fixed table for `n` in `{5, 6, 7, 12}`;
//! * **prime-power**: `n = p^a` with an `r`-cycle, `n/2 < r <= n - 3`;
//! * **phase 1**: an `r`-cycle and a fixed-point-free element whose cycles
//!   all have length at least `p^a`, where `r + p^a > n`
//!   (or `r = n - 2` with `n - 1` not a power of two);
//! * **phase 2**: `c` disjoint `r`-cycles fixing `k = n - c*r` points, paired
//!   with a base-`p` element, after excluding primitive, imprimitive and
//!   intransitive maximal subgroups.
//!
//! No permutation is ever built; every check works on base-`p` digits.

mod candidates;
mod checks;
mod cycles;
mod search;
mod verify;

pub use candidates::{enumerate_candidates, CandidateStream, Phase2Candidate};
pub use checks::{
    binomial_cover, check_candidate, imprimitive_block_pairs, imprimitivity_excluded,
    intransitivity_excluded, ls_primitive_excluded, repunit_double_match, Imprimitivity, Intransitivity, RejectReason,
    Verdict,
};
pub use cycles::{base_p_cycle_type, p_power_cycle_type, CycleType};
pub use search::{certify, phase2_search, Certificate, Phase2Result, DEFAULT_P_DEPTH};
pub use verify::verify_witness;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_power_of_two, is_prime, prime_power_parts, ArithError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("base-2 elements are not supported here")]
    UnsupportedBase,
    #[error("malformed witness: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessKind {
    SmallCase,
    PrimePower,
    Phase1,
    /// `c` cycles of length `r`, `k = n - c*r` fixed points; `p_rank` is the
    /// 1-based rank of `p`'s prime power among the odd prime-power divisors of `n`,
    /// largest first.
    Phase2 { c: u64, k: u64, p_rank: u32 },
}

impl WitnessKind {
    pub fn name(&self) -> &'static str {
        match self {
            WitnessKind::SmallCase => "small-case",
            WitnessKind::PrimePower => "prime-power",
            WitnessKind::Phase1 => "phase1",
            WitnessKind::Phase2 { .. } => "phase2",
        }
    }
}

/// Certificate that an element of prime order `r` and one of `p`-power order
/// invariably generate `A_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Witness {
    pub n: u64,
    pub kind: WitnessKind,
    pub r: u64,
    pub p: u64,
    pub a: u32,
}

/// An integer that failed the phase-1 test, with its sieve data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeftoverRecord {
    pub n: u64,
    /// Exact largest prime-power divisor when `smooth`, else the smooth bound.
    pub lppd: u64,
    pub smooth: bool,
}

/// `(n, r, p, a)`, hand-verified against the maximal subgroups of `A_n`.
const SMALL_CASES: [(u64, u64, u64, u32); 4] = [(5, 3, 5, 1), (6, 5, 2, 1), (7, 5, 7, 1), (12, 11, 3, 1)];

/// Table entries for degrees the general lemmas cannot reach.
///
/// * `A_5`: a 3-cycle and a 5-cycle. Any subgroup containing both has order
///   divisible by 15; the maximal subgroups `A_4`, `D_10` and `S_3` do not.
/// * `A_6`: a 5-cycle and a base-2 element (cycle type 2+4).
/// * `A_7`: a 5-cycle and a 7-cycle. Any subgroup containing both has order
///   divisible by 35; the maximal subgroups `A_6`, `PSL(2,7)`, `S_5`,
///   `(A_4 x 3):2` and `(S_3 x S_4) ∩ A_7` do not.
/// * `A_12`: an 11-cycle and a base-3 element (cycle type 3+9).
pub fn small_case_witness(n: u64) -> Option<Witness> {
    SMALL_CASES
        .iter()
        .find(|&&(m, ..)| m == n)
        .map(|&(n, r, p, a)| Witness { n, kind: WitnessKind::SmallCase, r, p, a })
}

/// For `n = p^a`: an `r`-cycle with `n/2 < r <= n - 3` (largest such `r`).
/// `Ok(None)` when no prime lies in that interval.
pub fn prime_power_witness(n: u64) -> Result<Option<Witness>, CheckError> {
    let (p, a) = prime_power_parts(n).ok_or(CheckError::NotPrimePower(n))?;
    if n < 6 {
        return Ok(None);
    }
    let r = (n / 2 + 1..=n - 3).rev().find(|&m| is_prime(m));
    Ok(r.map(|r| Witness { n, kind: WitnessKind::PrimePower, r, p, a }))
}

/// Prime-power witness given the largest prime `r <= n - 3`.
pub(crate) fn prime_power_witness_from(n: u64, p: u64, a: u32, r_below: u64) -> Option<Witness> {
    (r_below >= 2 && 2 * r_below > n && r_below + 3 <= n)
        .then_some(Witness { n, kind: WitnessKind::PrimePower, r: r_below, p, a })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase1Pass {
    pub n: u64,
    pub r: u64,
    pub lppd: u64,
    pub smooth: bool,
}

impl Phase1Pass {
    /// The phase-1 witness when the divisor is exact.
    pub fn witness(&self) -> Option<Witness> {
        if !self.smooth {
            return None;
        }
        let (p, a) = prime_power_parts(self.lppd)?;
        Some(Witness { n: self.n, kind: WitnessKind::Phase1, r: self.r, p, a })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase1Outcome {
    Pass(Phase1Pass),
    Leftover(LeftoverRecord),
}

/// Phase-1 predicate for a non-prime-power `n`. `r` is the largest prime
/// `<= n - 2`; `lppd` is exact when `smooth`, otherwise a lower bound.
#[inline]
pub fn phase1_check(n: u64, r: u64, lppd: u64, smooth: bool) -> Phase1Outcome {
    if phase1_passes(n, r, lppd) {
        Phase1Outcome::Pass(Phase1Pass { n, r, lppd, smooth })
    } else {
        Phase1Outcome::Leftover(LeftoverRecord { n, lppd, smooth })
    }
}

#[inline]
pub(crate) fn phase1_passes(n: u64, r: u64, pa: u64) -> bool {
    if r + 2 < n {
        r + pa > n
    } else {
        r + 2 == n && !is_power_of_two(n - 1) && pa >= 3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{factorize, largest_prime_power_divisor};

    fn prev_prime(m: u64) -> u64 {
        (2..=m).rev().find(|&x| is_prime(x)).unwrap()
    }

    #[test]
    fn phase1_examples() {
        let Phase1Outcome::Pass(pass) = phase1_check(24, 19, 8, true) else { panic!() };
        assert_eq!(
            pass.witness(),
            Some(Witness { n: 24, kind: WitnessKind::Phase1, r: 19, p: 2, a: 3 })
        );
        assert_eq!(prev_prime(31414), 31397);
        assert!(matches!(phase1_check(31416, 31397, 17, true), Phase1Outcome::Leftover(_)));
        assert_eq!(
            phase1_check(6, 3, 3, true),
            Phase1Outcome::Leftover(LeftoverRecord { n: 6, lppd: 3, smooth: true })
        );
        // r = n - 2 with n - 1 a power of two is not enough
        assert!(matches!(phase1_check(33, 31, 11, true), Phase1Outcome::Leftover(_)));
        assert!(matches!(phase1_check(15, 13, 5, true), Phase1Outcome::Pass(_)));
        // lower-bound divisors give no witness
        let Phase1Outcome::Pass(pass) = phase1_check(1_000_003 * 2, 2_000_003, 120, false) else {
            panic!()
        };
        assert_eq!(pass.witness(), None);
    }

    #[test]
    fn phase1_matches_lemma_brute_force() {
        for n in 25..=100_000u64 {
            let f = factorize(n);
            if f.factors().len() == 1 {
                continue;
            }
            let pa = largest_prime_power_divisor(&f).unwrap().value;
            let r = prev_prime(n - 2);
            let expected = (r < n - 2 && r + pa > n)
                || (r == n - 2 && (n - 1).count_ones() != 1 && pa >= 3);
            assert_eq!(
                matches!(phase1_check(n, r, pa, true), Phase1Outcome::Pass(_)),
                expected,
                "n = {n}"
            );
        }
    }

    #[test]
    fn prime_power_examples() {
        assert_eq!(prime_power_witness(8).unwrap().map(|w| w.r), Some(5));
        assert_eq!(prime_power_witness(9).unwrap().map(|w| w.r), Some(5));
        assert_eq!(prime_power_witness(5).unwrap(), None);
        assert_eq!(prime_power_witness(7).unwrap(), None);
        assert_eq!(prime_power_witness(12), Err(CheckError::NotPrimePower(12)));
        let w = prime_power_witness(1024).unwrap().unwrap();
        assert_eq!((w.p, w.a, w.r), (2, 10, 1021));
    }

    #[test]
    fn small_case_table() {
        let pick = |n| small_case_witness(n).map(|w| (w.r, w.p));
        assert_eq!(pick(6), Some((5, 2)));
        assert_eq!(pick(12), Some((11, 3)));
        assert_eq!(pick(5), Some((3, 5)));
        assert_eq!(pick(7), Some((5, 7)));
        assert_eq!(pick(8), None);
        assert_eq!(pick(24), None);
    }
}
