use std::collections::BTreeMap;

use super::CheckError;
use crate::arith::base_digits;

/// Cycle lengths with multiplicities. Length 1 counts fixed points.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CycleType {
    counts: BTreeMap<u64, u64>,
}

impl CycleType {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut counts = BTreeMap::new();
        for (length, count) in pairs {
            if count > 0 {
                *counts.entry(length).or_insert(0) += count;
            }
        }
        CycleType { counts }
    }

    /// `(length, count)` pairs by ascending length.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&l, &c)| (l, c))
    }

    pub fn count(&self, length: u64) -> u64 {
        self.counts.get(&length).copied().unwrap_or(0)
    }

    /// Number of points moved or fixed, `sum length * count`.
    pub fn degree(&self) -> u128 {
        self.entries().map(|(l, c)| l as u128 * c as u128).sum()
    }

    /// Whether a permutation of this type lies in the alternating group.
    pub fn is_even(&self) -> bool {
        self.entries()
            .filter(|&(l, _)| l % 2 == 0)
            .map(|(_, c)| c)
            .sum::<u64>()
            % 2
            == 0
    }
}

/// A fixed-point-free even element whose cycles are `p`-powers of length at
/// least `p^a`: `n / p^a` cycles of length `p^a`, with two of them merged when
/// `p = 2` and their count is odd.
pub fn p_power_cycle_type(n: u64, p: u64, a: u32) -> Result<CycleType, CheckError> {
    let pa = p
        .checked_pow(a)
        .filter(|&pa| a >= 1 && p >= 2 && n % pa == 0 && n > pa)
        .ok_or_else(|| CheckError::Precondition(format!("{p}^{a} must properly divide {n}")))?;
    let count = n / pa;
    let ty = if p == 2 && count % 2 == 1 {
        CycleType::from_pairs([(pa, count - 2), (2 * pa, 1)])
    } else {
        CycleType::from_pairs([(pa, count)])
    };
    debug_assert!(ty.is_even() && ty.degree() == n as u128);
    Ok(ty)
}

/// `alpha_i` cycles of length `p^i`, where `alpha_i` are the base-`p` digits of `n`.
pub fn base_p_cycle_type(n: u64, p: u64) -> Result<CycleType, CheckError> {
    if p == 2 {
        return Err(CheckError::UnsupportedBase);
    }
    let digits = base_digits(n, p)?;
    let mut length = 1u64;
    let mut pairs = Vec::with_capacity(digits.len());
    for (i, &alpha) in digits.digits().iter().enumerate() {
        if i > 0 {
            length *= p;
        }
        pairs.push((length, alpha));
    }
    Ok(CycleType::from_pairs(pairs))
}
