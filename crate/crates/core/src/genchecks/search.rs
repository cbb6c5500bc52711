use super::checks::{check_unchecked, validate_candidate};
use super::{
    enumerate_candidates, phase1_passes, prime_power_witness, small_case_witness, CheckError,
    Phase2Candidate, Witness, WitnessKind,
};
use crate::arith::{factorize, is_prime, is_prime_power, largest_prime_power_divisor, Factorization, PrimePower};

/// Odd prime-power divisors tried per candidate before escalating.
pub const DEFAULT_P_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase2Result {
    pub witness: Option<Witness>,
    /// True when the first `depth` divisors were not enough.
    pub escalated: bool,
}

/// Searches candidates against the `depth` largest odd prime-power divisors
/// of `n`, then against the remaining ones in increasing rank.
///
/// `f` must be the factorization of `n`. Prime powers and `n = 24` are never
/// searched.
pub fn phase2_search(n: u64, f: &Factorization, depth: usize) -> Phase2Result {
    let none = Phase2Result { witness: None, escalated: false };
    if n == 24 || n < 5 || f.factors().len() < 2 {
        return none;
    }
    let Ok(lppd) = largest_prime_power_divisor(f) else { return none };
    let odd = f.odd_prime_powers_desc();
    let head = depth.min(odd.len());

    let witness = |cand: &Phase2Candidate, rank: usize, pp: &PrimePower| Witness {
        n,
        kind: WitnessKind::Phase2 { c: cand.c, k: cand.k, p_rank: rank as u32 + 1 },
        r: cand.r,
        p: pp.p,
        a: pp.a,
    };

    let mut seen = Vec::new();
    for cand in enumerate_candidates(n, lppd.value) {
        debug_assert!(validate_candidate(n, &cand).is_ok());
        for (rank, pp) in odd.iter().enumerate().take(head) {
            if check_unchecked(n, &cand, pp.p).is_accept() {
                return Phase2Result { witness: Some(witness(&cand, rank, pp)), escalated: false };
            }
        }
        seen.push(cand);
    }

    for (rank, pp) in odd.iter().enumerate().skip(head) {
        for cand in &seen {
            if check_unchecked(n, cand, pp.p).is_accept() {
                return Phase2Result { witness: Some(witness(cand, rank, pp)), escalated: true };
            }
        }
    }
    Phase2Result { witness: None, escalated: head < odd.len() }
}

/// Largest prime `<= m`, if any.
pub(crate) fn prev_prime(m: u64) -> Option<u64> {
    if m < 2 {
        return None;
    }
    if m == 2 {
        return Some(2);
    }
    let mut x = if m % 2 == 0 { m - 1 } else { m };
    while x >= 3 {
        if is_prime(x) {
            return Some(x);
        }
        x -= 2;
    }
    Some(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certificate {
    pub witness: Option<Witness>,
    /// `n` failed the phase-1 test.
    pub leftover: bool,
    pub escalated: bool,
}

/// Certificate for a single `n >= 5` from exact factorization, in the order
/// prime-power, phase 1, small-case table, phase 2.
pub fn certify(n: u64, depth: usize) -> Result<Certificate, CheckError> {
    if n < 5 {
        return Err(CheckError::Precondition(format!("n = {n} is below 5")));
    }
    let done = |witness| Ok(Certificate { witness: Some(witness), leftover: false, escalated: false });
    if is_prime_power(n) {
        return match prime_power_witness(n)?.or_else(|| small_case_witness(n)) {
            Some(w) => done(w),
            None => Ok(Certificate { witness: None, leftover: false, escalated: false }),
        };
    }
    let f = factorize(n);
    let lppd = largest_prime_power_divisor(&f)?;
    let r = prev_prime(n - 2).expect("n >= 5 has a prime below n - 2");
    if phase1_passes(n, r, lppd.value) {
        return done(Witness { n, kind: WitnessKind::Phase1, r, p: lppd.p, a: lppd.a });
    }
    if let Some(w) = small_case_witness(n) {
        return Ok(Certificate { witness: Some(w), leftover: true, escalated: false });
    }
    let found = phase2_search(n, &f, depth);
    Ok(Certificate { witness: found.witness, leftover: true, escalated: found.escalated })
}
