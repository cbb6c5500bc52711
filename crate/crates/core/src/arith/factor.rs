use num_integer::Integer;

use super::prime::{is_prime, odd_divisor_table, Montgomery};
use super::ArithError;

/// Trial division bound used by [`factorize`].
pub const DEFAULT_TRIAL_BOUND: u64 = 100_000;

/// Prime factorization as `(prime, exponent)` pairs in ascending prime order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of all prime powers, `None` on overflow.
    pub fn product(&self) -> Option<u64> {
        self.factors
            .iter()
            .try_fold(1u64, |acc, &(p, e)| acc.checked_mul(p.checked_pow(e)?))
    }

    /// Every full prime-power divisor `p^v_p(n)`, in ascending prime order.
    pub fn prime_powers(&self) -> impl Iterator<Item = PrimePower> + '_ {
        self.factors.iter().map(|&(p, a)| PrimePower { p, a, value: p.pow(a) })
    }

    /// Odd full prime-power divisors, largest value first.
    pub fn odd_prime_powers_desc(&self) -> Vec<PrimePower> {
        let mut out: Vec<PrimePower> = self.prime_powers().filter(|pp| pp.p != 2).collect();
        out.sort_by(|x, y| y.value.cmp(&x.value));
        out
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    fn push(&mut self, p: u64, e: u32) {
        match self.factors.iter_mut().find(|(q, _)| *q == p) {
            Some(entry) => entry.1 += e,
            None => self.factors.push((p, e)),
        }
    }
}

/// `p^a` with its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub p: u64,
    pub a: u32,
    pub value: u64,
}

pub fn largest_prime_power_divisor(f: &Factorization) -> Result<PrimePower, ArithError> {
    f.prime_powers()
        .max_by_key(|pp| pp.value)
        .ok_or(ArithError::EmptyFactorization)
}

/// Complete factorization of `n >= 1`.
pub fn factorize(n: u64) -> Factorization {
    factorize_with_bound(n, DEFAULT_TRIAL_BOUND)
}

/// Trial division by primes up to `trial_bound` (capped at
/// [`DEFAULT_TRIAL_BOUND`]), then Pollard-Brent on the cofactor.
pub fn factorize_with_bound(n: u64, trial_bound: u64) -> Factorization {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut f = Factorization::default();
    let mut rest = n;
    if rest % 2 == 0 {
        let v = rest.trailing_zeros();
        rest >>= v;
        f.push(2, v);
    }
    for d in odd_divisor_table(trial_bound) {
        if d.p.saturating_mul(d.p) > rest {
            break;
        }
        if let Some(mut q) = d.divide(rest) {
            let mut e = 1;
            while let Some(q2) = d.divide(q) {
                q = q2;
                e += 1;
            }
            rest = q;
            f.push(d.p, e);
        }
    }
    if rest > 1 {
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime(m) {
                f.push(m, 1);
                continue;
            }
            if let Some(root) = exact_square_root(m) {
                stack.push(root);
                stack.push(root);
                continue;
            }
            let d = pollard_brent(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    f.factors.sort_unstable_by_key(|&(p, _)| p);
    f
}

fn exact_square_root(m: u64) -> Option<u64> {
    let r = m.isqrt();
    (r * r == m).then_some(r)
}

/// A nontrivial divisor of an odd composite `n`. Retries with successive
/// polynomial constants, so the result is deterministic.
fn pollard_brent(n: u64) -> u64 {
    debug_assert!(n % 2 == 1 && !is_prime(n));
    let mont = Montgomery::new(n);
    const BATCH: u64 = 128;
    for seed in 1u64.. {
        let c = mont.to_mont(seed);
        let step = |x: u64| mont.add(mont.mul(x, x), c);
        let mut y = mont.to_mont(2 + seed);
        let mut x = y;
        let mut ys = y;
        let mut g = 1u64;
        let mut q = mont.to_mont(1);
        let mut r = 1u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = step(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = step(y);
                    q = mont.mul(q, x.abs_diff(y));
                }
                g = mont.from_mont(q).gcd(&n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            // Batch overshot; redo one step at a time from the saved point.
            loop {
                ys = step(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g != 1 {
                    break;
                }
            }
        }
        if g != n && g != 1 {
            return g;
        }
    }
    unreachable!()
}
