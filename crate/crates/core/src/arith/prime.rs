use std::sync::OnceLock;

/// Montgomery arithmetic modulo an odd `n < 2^64`, `R = 2^64`.
#[derive(Debug, Clone, Copy)]
pub struct Montgomery {
    n: u64,
    /// `n^{-1} mod 2^64`
    inv: u64,
    r2: u64,
}

impl Montgomery {
    pub fn new(n: u64) -> Self {
        assert!(n % 2 == 1, "Montgomery modulus must be odd");
        let inv = inverse_mod_word(n);
        let r = ((u64::MAX % n) + 1) % n;
        let r2 = ((r as u128 * r as u128) % n as u128) as u64;
        Montgomery { n, inv, r2 }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.n
    }

    #[inline]
    fn reduce(&self, t: u128) -> u64 {
        let lo = t as u64;
        let hi = (t >> 64) as u64;
        let m = lo.wrapping_mul(self.inv);
        let mn_hi = ((m as u128 * self.n as u128) >> 64) as u64;
        let (res, borrow) = hi.overflowing_sub(mn_hi);
        if borrow {
            res.wrapping_add(self.n)
        } else {
            res
        }
    }

    #[inline]
    pub fn to_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128 * self.r2 as u128)
    }

    #[inline]
    pub fn from_mont(&self, a: u64) -> u64 {
        self.reduce(a as u128)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (s, overflow) = a.overflowing_add(b);
        if overflow || s >= self.n {
            s.wrapping_sub(self.n)
        } else {
            s
        }
    }

    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = self.to_mont(1);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }
}

/// `n^{-1} mod 2^64` for odd `n` by Newton iteration.
#[inline]
fn inverse_mod_word(n: u64) -> u64 {
    let mut inv = n;
    for _ in 0..5 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(inv)));
    }
    inv
}

/// Divisibility test and exact quotient by a fixed odd divisor without a
/// hardware division.
#[derive(Debug, Clone, Copy)]
pub struct ExactDivisor {
    pub p: u64,
    inv: u64,
    limit: u64,
}

impl ExactDivisor {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1, "ExactDivisor requires an odd divisor");
        ExactDivisor { p, inv: inverse_mod_word(p), limit: u64::MAX / p }
    }

    /// `Some(n / p)` when `p | n`.
    #[inline]
    pub fn divide(&self, n: u64) -> Option<u64> {
        let q = n.wrapping_mul(self.inv);
        (q <= self.limit).then_some(q)
    }

    /// `n / p`, valid only when `p | n`.
    #[inline]
    pub fn divide_exact(&self, n: u64) -> u64 {
        n.wrapping_mul(self.inv)
    }
}

/// All primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = usize::try_from(limit).expect("prime table limit fits in memory");
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    if n < (1 << 32) {
        miller_rabin(n, &[2, 7, 61])
    } else {
        miller_rabin(n, &[2, 325, 9375, 28178, 450775, 9780504, 1795265022])
    }
}

fn miller_rabin(n: u64, bases: &[u64]) -> bool {
    let mont = Montgomery::new(n);
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let one = mont.to_mont(1);
    let minus_one = mont.to_mont(n - 1);
    'bases: for &a in bases {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = mont.pow(mont.to_mont(a), d);
        if x == one || x == minus_one {
            continue;
        }
        for _ in 1..s {
            x = mont.mul(x, x);
            if x == minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Odd primes up to `limit` with precomputed exact-division data.
pub(crate) fn odd_divisor_table(limit: u64) -> &'static [ExactDivisor] {
    static TABLE: OnceLock<Vec<ExactDivisor>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        primes_up_to(super::DEFAULT_TRIAL_BOUND)
            .into_iter()
            .skip(1)
            .map(ExactDivisor::new)
            .collect()
    });
    if limit >= super::DEFAULT_TRIAL_BOUND {
        table
    } else {
        let end = table.partition_point(|d| d.p <= limit);
        &table[..end]
    }
}
