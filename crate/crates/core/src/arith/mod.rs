//! Exact 64-bit integer arithmetic used by the sieve and the lemma checks.
//!
//! Everything here is a pure function of its inputs. Digit vectors are
//! little-endian: index `i` holds the coefficient of `base^i`.

mod digits;
mod factor;
mod prime;

pub(crate) use digits::dominated_unchecked;
pub use digits::{base_digits, carry_free_product, digit_convolution, digits_dominated, DigitVector};
pub use factor::{
    factorize, factorize_with_bound, largest_prime_power_divisor, Factorization, PrimePower,
    DEFAULT_TRIAL_BOUND,
};
pub use prime::{is_prime, primes_up_to, ExactDivisor, Montgomery};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("base must be at least 2 (got {0})")]
    InvalidBase(u64),
    #[error("subset size {i} exceeds set size {n}")]
    SubsetTooLarge { i: u64, n: u64 },
    #[error("empty factorization has no prime-power divisor")]
    EmptyFactorization,
}

/// `n = 1 + q + ... + q^(length-1)` with `q >= 2`, `length >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RepunitForm {
    pub q: u64,
    pub length: u32,
}

impl RepunitForm {
    /// The represented integer, `None` on overflow.
    pub fn value(&self) -> Option<u64> {
        let mut acc: u64 = 0;
        let mut term: u64 = 1;
        for j in 0..self.length {
            acc = acc.checked_add(term)?;
            if j + 1 < self.length {
                term = term.checked_mul(self.q)?;
            }
        }
        Some(acc)
    }
}

/// Length `L` such that `n = 1 + q + ... + q^(L-1)`, if any. `repunit_length(1, q) = Some(1)`.
pub fn repunit_length(n: u64, q: u64) -> Option<u32> {
    if q < 2 || n == 0 {
        return None;
    }
    let mut m = n;
    let mut length = 1;
    while m > 1 {
        if (m - 1) % q != 0 {
            return None;
        }
        m = (m - 1) / q;
        length += 1;
    }
    (m == 1).then_some(length)
}

/// All ways of writing `k` as a repunit of length at least 2, by ascending `q`.
pub fn repunit_forms(k: u64) -> Vec<RepunitForm> {
    let mut forms = Vec::new();
    if k <= 2 {
        return forms;
    }
    // Length >= 3 forces q^2 < k.
    let mut q: u64 = 2;
    while q.checked_mul(q).is_some_and(|sq| sq < k) {
        if let Some(length) = repunit_length(k, q) {
            if length >= 3 {
                forms.push(RepunitForm { q, length });
            }
        }
        q += 1;
    }
    forms.push(RepunitForm { q: k - 1, length: 2 });
    forms
}

pub fn is_power_of_two(n: u64) -> bool {
    n.is_power_of_two()
}

/// `floor(sqrt(n))`, exact for every `u64`.
pub fn integer_sqrt(n: u64) -> u64 {
    n.isqrt()
}

/// `floor(n^(1/k))` for `k >= 1`.
pub fn integer_root(n: u64, k: u32) -> u64 {
    match k {
        0 => panic!("zeroth root"),
        1 => return n,
        2 => return n.isqrt(),
        _ => {}
    }
    let mut x = (n as f64).powf(1.0 / k as f64).round() as u64;
    while x > 0 && x.checked_pow(k).is_none_or(|v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_pow(k).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

/// `Some((p, a))` when `n = p^a` for a prime `p` and `a >= 1`.
pub fn prime_power_parts(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    if n & (n - 1) == 0 {
        return Some((2, n.trailing_zeros()));
    }
    if n % 2 == 0 {
        return None;
    }
    if is_prime(n) {
        return Some((n, 1));
    }
    let max_exp = 64 - n.leading_zeros();
    for k in 2..=max_exp {
        let root = integer_root(n, k);
        if root < 3 {
            break;
        }
        if root.checked_pow(k) == Some(n) {
            // A perfect k-th power of a prime power is handled by recursing on the root.
            return prime_power_parts(root).map(|(p, a)| (p, a * k));
        }
    }
    None
}

pub fn is_prime_power(n: u64) -> bool {
    prime_power_parts(n).is_some()
}

/// `p^a` or `None` on overflow.
pub fn checked_prime_power(p: u64, a: u32) -> Option<u64> {
    p.checked_pow(a)
}

/// Exponent of `p` in `n` (`n > 0`, `p >= 2`).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n > 0 && p >= 2);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}
