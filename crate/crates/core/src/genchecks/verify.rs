use super::checks::check_unchecked;
use super::{small_case_witness, CheckError, Phase2Candidate, Witness, WitnessKind};
use crate::arith::{
    factorize, integer_sqrt, is_power_of_two, is_prime, largest_prime_power_divisor,
    prime_power_parts, valuation,
};

fn malformed(msg: impl Into<String>) -> CheckError {
    CheckError::Malformed(msg.into())
}

/// Re-derives every property a witness claims, from `n` alone.
///
/// `Ok(false)` means a well-formed record whose claim does not hold;
/// `Err` means the record is structurally impossible.
pub fn verify_witness(w: &Witness) -> Result<bool, CheckError> {
    if w.n < 5 {
        return Err(malformed(format!("n = {} is below 5", w.n)));
    }
    if w.a == 0 {
        return Err(malformed("exponent a must be at least 1"));
    }
    if w.p < 2 || w.r < 2 {
        return Err(malformed("p and r must be at least 2"));
    }
    let Some(pa) = w.p.checked_pow(w.a) else {
        return Ok(false);
    };
    match w.kind {
        WitnessKind::SmallCase => Ok(small_case_witness(w.n) == Some(*w)),
        WitnessKind::PrimePower => Ok(is_prime(w.p)
            && prime_power_parts(w.n) == Some((w.p, w.a))
            && is_prime(w.r)
            && 2 * w.r > w.n
            && w.r + 3 <= w.n),
        WitnessKind::Phase1 => {
            if !(is_prime(w.r) && is_prime(w.p) && w.n % pa == 0 && pa < w.n) {
                return Ok(false);
            }
            Ok(if w.r + 2 < w.n {
                w.r + pa > w.n
            } else {
                w.r + 2 == w.n && !is_power_of_two(w.n - 1) && pa >= 3
            })
        }
        WitnessKind::Phase2 { c, k, p_rank } => verify_phase2(w, c, k, p_rank),
    }
}

fn verify_phase2(w: &Witness, c: u64, k: u64, p_rank: u32) -> Result<bool, CheckError> {
    let n = w.n;
    if c == 0 {
        return Err(malformed("c must be at least 1"));
    }
    if p_rank == 0 {
        return Err(malformed("p_rank is 1-based"));
    }
    if c.checked_mul(w.r).and_then(|cr| cr.checked_add(k)) != Some(n) {
        return Err(malformed(format!("c*r + k != n for n = {n}")));
    }
    if w.p == 2 || !is_prime(w.p) || !is_prime(w.r) || n == 24 {
        return Ok(false);
    }
    let f = factorize(n);
    if f.factors().len() < 2 || valuation(n, w.p) != w.a {
        return Ok(false);
    }
    let ranked = f.odd_prime_powers_desc();
    if ranked.get(p_rank as usize - 1).map(|pp| pp.p) != Some(w.p) {
        return Ok(false);
    }
    let lppd = largest_prime_power_divisor(&f)?.value;
    let cr = n - k;
    let shape = w.r >= 2 * integer_sqrt(n)
        && n - lppd < cr
        && cr < n - 2
        && (3..lppd).contains(&k)
        && k < w.r
        && c < w.r;
    if !shape {
        return Ok(false);
    }
    let cand = Phase2Candidate { c, r: w.r, k };
    Ok(check_unchecked(n, &cand, w.p).is_accept())
}
