use num_integer::Integer;

use super::{CheckError, Phase2Candidate};
use crate::arith::{
    base_digits, carry_free_product, dominated_unchecked, integer_sqrt, is_prime_power,
    repunit_forms, repunit_length,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intransitivity {
    Excluded,
    /// A base-`p` element and the `r`-element both fix a set of this size.
    Blocked(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Imprimitivity {
    Excluded,
    /// `e` blocks of size `d` survive: multiplying `d` by `e` has no carry.
    Blocked { d: u64, e: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// `n` and `k` are both repunits in base `q`, `n` the longer one.
    Primitive { q: u64 },
    Intransitive { i: u64 },
    Imprimitive { d: u64, e: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<(), CheckError> {
    if cond {
        Ok(())
    } else {
        Err(CheckError::Precondition(what()))
    }
}

fn require_consistent(n: u64, cand: &Phase2Candidate) -> Result<(), CheckError> {
    require(cand.is_consistent(n), || {
        format!("({}, {}, {}) is not a base-r digit pair of {n}", cand.c, cand.r, cand.k)
    })
}

fn require_odd_base(p: u64) -> Result<(), CheckError> {
    match p {
        2 => Err(CheckError::UnsupportedBase),
        p if p < 2 => Err(crate::arith::ArithError::InvalidBase(p).into()),
        _ => Ok(()),
    }
}

/// Preconditions under which only the repunit case of the primitive
/// classification can contain both elements.
pub(crate) fn validate_candidate(n: u64, cand: &Phase2Candidate) -> Result<(), CheckError> {
    require_consistent(n, cand)?;
    require(cand.c >= 1, || "c must be positive".into())?;
    require(cand.r >= 2 * integer_sqrt(n), || {
        format!("r = {} is below 2*isqrt({n})", cand.r)
    })?;
    require(cand.k >= 3, || format!("k = {} is below 3", cand.k))?;
    require(n != 24, || "n = 24 is excluded".into())?;
    require(!is_prime_power(n), || format!("{n} is a prime power"))?;
    Ok(())
}

/// The smallest `q` for which `k` and `n` are both repunits in base `q` with
/// `n` strictly longer.
pub fn repunit_double_match(n: u64, k: u64) -> Option<u64> {
    // Sharing a base q forces q | gcd(n - 1, k - 1).
    if k < 3 || n < 3 || (n - 1).gcd(&(k - 1)) == 1 {
        return None;
    }
    repunit_forms(k)
        .into_iter()
        .find(|form| repunit_length(n, form.q).is_some_and(|len| len > form.length))
        .map(|form| form.q)
}

/// True when no primitive group of projective type can contain both elements.
pub fn ls_primitive_excluded(n: u64, cand: &Phase2Candidate) -> Result<bool, CheckError> {
    validate_candidate(n, cand)?;
    Ok(repunit_double_match(n, cand.k).is_none())
}

/// Every union of `r`-cycles and fixed points, `a*r + b` with `a <= c`,
/// `b <= k`, must be a size no base-`p` element can fix.
pub fn intransitivity_excluded(
    n: u64,
    cand: &Phase2Candidate,
    p: u64,
) -> Result<Intransitivity, CheckError> {
    require_odd_base(p)?;
    require_consistent(n, cand)?;
    Ok(intransitive_block(n, cand, p).map_or(Intransitivity::Excluded, Intransitivity::Blocked))
}

fn intransitive_block(n: u64, cand: &Phase2Candidate, p: u64) -> Option<u64> {
    for a in 0..=cand.c {
        let base = a * cand.r;
        for b in 0..=cand.k {
            let i = base + b;
            if i == 0 || i >= n {
                continue;
            }
            if dominated_unchecked(i, n, p) {
                return Some(i);
            }
        }
    }
    None
}

/// Factor pairs `(n/x, x)` for every divisor `x >= 2` of `g` that also
/// divides `n` with `n/x >= 2`.
pub fn imprimitive_block_pairs(n: u64, g: u64) -> Vec<(u64, u64)> {
    let mut xs = Vec::new();
    let mut x = 1;
    while x * x <= g {
        if g % x == 0 {
            xs.push(x);
            if x != g / x {
                xs.push(g / x);
            }
        }
        x += 1;
    }
    xs.sort_unstable();
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for x in xs {
        if x < 2 || n % x != 0 || n / x < 2 {
            continue;
        }
        let pair = (n / x, x);
        // (d, e) and (e, d) describe the same test; keep the first seen.
        if !pairs.iter().any(|&(d, e)| (d, e) == pair || (e, d) == pair) {
            pairs.push(pair);
        }
    }
    pairs
}

/// A system of blocks preserved by the `r`-element has block size or block
/// count dividing `gcd(c, k)`; a base-`p` element can only preserve it when
/// the product of the two is carry-free.
pub fn imprimitivity_excluded(
    n: u64,
    cand: &Phase2Candidate,
    p: u64,
) -> Result<Imprimitivity, CheckError> {
    require_odd_base(p)?;
    require_consistent(n, cand)?;
    Ok(imprimitive_block(n, cand, p)
        .map_or(Imprimitivity::Excluded, |(d, e)| Imprimitivity::Blocked { d, e }))
}

fn imprimitive_block(n: u64, cand: &Phase2Candidate, p: u64) -> Option<(u64, u64)> {
    let g = cand.c.gcd(&cand.k);
    if g < 2 {
        return None;
    }
    imprimitive_block_pairs(n, g)
        .into_iter()
        .find(|&(d, e)| carry_free_product(d, e, p))
}

/// Runs the primitive, intransitive and imprimitive exclusions in that order
/// and reports the first failure.
pub fn check_candidate(n: u64, cand: &Phase2Candidate, p: u64) -> Result<Verdict, CheckError> {
    require_odd_base(p)?;
    validate_candidate(n, cand)?;
    Ok(check_unchecked(n, cand, p))
}

/// [`check_candidate`] without precondition checks.
pub(crate) fn check_unchecked(n: u64, cand: &Phase2Candidate, p: u64) -> Verdict {
    if let Some(q) = repunit_double_match(n, cand.k) {
        return Verdict::Reject(RejectReason::Primitive { q });
    }
    if let Some(i) = intransitive_block(n, cand, p) {
        return Verdict::Reject(RejectReason::Intransitive { i });
    }
    if let Some((d, e)) = imprimitive_block(n, cand, p) {
        return Verdict::Reject(RejectReason::Imprimitive { d, e });
    }
    Verdict::Accept
}

/// True when every `C(n, i)` with `0 < i < n` is divisible by `p` or `r`.
///
/// Enumerates the sizes whose digits are dominated by `n` in whichever base
/// leaves fewer of them, and tests each against the other base.
pub fn binomial_cover(n: u64, p: u64, r: u64) -> Result<bool, CheckError> {
    let dp = base_digits(n, p)?;
    let dr = base_digits(n, r)?;
    let count = |d: &[u64]| d.iter().fold(1u128, |acc, &x| acc.saturating_mul(x as u128 + 1));
    let (outer, other) = if count(dp.digits()) <= count(dr.digits()) { (&dp, r) } else { (&dr, p) };

    // Odometer over digit vectors below n's digits, least significant first.
    let digits = outer.digits();
    let base = outer.base();
    let mut place = vec![1u64; digits.len()];
    for j in 1..digits.len() {
        place[j] = place[j - 1] * base;
    }
    let mut current = vec![0u64; digits.len()];
    let mut value = 0u64;
    loop {
        if value > 0 && value < n && dominated_unchecked(value, n, other) {
            return Ok(false);
        }
        let mut j = 0;
        loop {
            if j == digits.len() {
                return Ok(true);
            }
            if current[j] < digits[j] {
                current[j] += 1;
                value += place[j];
                break;
            }
            value -= current[j] * place[j];
            current[j] = 0;
            j += 1;
        }
    }
}
