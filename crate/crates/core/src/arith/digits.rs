use super::ArithError;

/// Base-`p` digits of an integer, least significant first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitVector {
    digits: Vec<u64>,
    base: u64,
}

impl DigitVector {
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// Digit at place `base^i`; zero past the end.
    pub fn get(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `sum digits[i] * base^i`, computed in 128 bits.
    pub fn value(&self) -> u128 {
        self.digits
            .iter()
            .rev()
            .fold(0u128, |acc, &d| acc * self.base as u128 + d as u128)
    }
}

pub fn base_digits(mut n: u64, p: u64) -> Result<DigitVector, ArithError> {
    if p < 2 {
        return Err(ArithError::InvalidBase(p));
    }
    let mut digits = Vec::new();
    while n > 0 {
        digits.push(n % p);
        n /= p;
    }
    Ok(DigitVector { digits, base: p })
}

/// Kummer's criterion: true iff every base-`p` digit of `i` is at most the
/// matching digit of `n`, i.e. `p` does not divide `C(n, i)`.
pub fn digits_dominated(i: u64, n: u64, p: u64) -> Result<bool, ArithError> {
    if p < 2 {
        return Err(ArithError::InvalidBase(p));
    }
    if i > n {
        return Err(ArithError::SubsetTooLarge { i, n });
    }
    Ok(dominated_unchecked(i, n, p))
}

#[inline]
pub(crate) fn dominated_unchecked(mut i: u64, mut n: u64, p: u64) -> bool {
    while i > 0 {
        if i % p > n % p {
            return false;
        }
        i /= p;
        n /= p;
    }
    true
}

/// Coefficients of the product of the two digit polynomials, before any carry.
pub fn digit_convolution(d: &DigitVector, e: &DigitVector) -> Vec<u128> {
    if d.is_empty() || e.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; d.len() + e.len() - 1];
    for (i, &x) in d.digits().iter().enumerate() {
        for (j, &y) in e.digits().iter().enumerate() {
            out[i + j] += x as u128 * y as u128;
        }
    }
    out
}

/// True iff multiplying `d` by `e` in base `p` produces no carry: every
/// digit-convolution coefficient stays below `p`.
pub fn carry_free_product(d: u64, e: u64, p: u64) -> bool {
    debug_assert!(p >= 2);
    let mut dd = [0u64; 64];
    let mut ed = [0u64; 64];
    let ld = fill_digits(d, p, &mut dd);
    let le = fill_digits(e, p, &mut ed);
    if ld == 0 || le == 0 {
        return true;
    }
    for place in 0..(ld + le).saturating_sub(1) {
        let lo = place.saturating_sub(le - 1);
        let hi = place.min(ld - 1);
        let mut coeff: u128 = 0;
        for i in lo..=hi {
            coeff += dd[i] as u128 * ed[place - i] as u128;
            if coeff >= p as u128 {
                return false;
            }
        }
    }
    true
}

fn fill_digits(mut n: u64, p: u64, out: &mut [u64; 64]) -> usize {
    let mut len = 0;
    while n > 0 {
        out[len] = n % p;
        n /= p;
        len += 1;
    }
    len
}
