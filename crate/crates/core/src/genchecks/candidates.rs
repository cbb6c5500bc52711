use crate::arith::{factorize, integer_sqrt, is_prime};

/// `c` disjoint `r`-cycles with `k` fixed points; `(k, c)` are the base-`r`
/// digits of `n = c*r + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase2Candidate {
    pub c: u64,
    pub r: u64,
    pub k: u64,
}

impl Phase2Candidate {
    /// Checks `c*r + k = n`, `k < r`, `c < r`.
    pub fn is_consistent(&self, n: u64) -> bool {
        self.c
            .checked_mul(self.r)
            .and_then(|cr| cr.checked_add(self.k))
            .is_some_and(|total| total == n)
            && self.k < self.r
            && self.c < self.r
    }
}

#[derive(Debug, Clone)]
enum Stage {
    /// Fixed multiplier `c`, primes `r` from `next` down to `floor`.
    Multiples { c: u64, next: u64, floor: u64 },
    /// Factor each `t`, descending.
    Fallback { t: u64 },
    Done,
}

/// Lazily ordered candidates `c*r` strictly between `n - pa` and `n - 2`.
///
/// First `c = 2, 3, ..., pa/2` with primes `r` descending for each `c`; then
/// every `t` in the window (descending) is factored and a prime factor
/// `r >= 2*isqrt(n)` yields `c = t / r` for multipliers not covered above.
/// All candidates satisfy `r >= 2*isqrt(n)`, `3 <= k < pa`, `k < r`, `c < r`.
#[derive(Debug, Clone)]
pub struct CandidateStream {
    n: u64,
    pa: u64,
    min_r: u64,
    max_c: u64,
    stage: Stage,
}

pub fn enumerate_candidates(n: u64, pa: u64) -> CandidateStream {
    let min_r = 2 * integer_sqrt(n);
    let max_c = pa / 2;
    let mut stream = CandidateStream { n, pa, min_r, max_c, stage: Stage::Done };
    if pa > 3 && pa < n {
        stream.stage = stream.multiples_stage(2);
    }
    stream
}

impl CandidateStream {
    fn multiples_stage(&self, c: u64) -> Stage {
        if c > self.max_c {
            return self.fallback_stage();
        }
        // n - pa < c*r < n - 2
        let lo = self.n - self.pa;
        let hi = self.n - 2;
        let top = (hi - 1) / c;
        let floor = (lo / c + 1).max(self.min_r).max(2);
        Stage::Multiples { c, next: top, floor }
    }

    fn fallback_stage(&self) -> Stage {
        Stage::Fallback { t: self.n - 3 }
    }

    fn admit(&self, c: u64, r: u64) -> Option<Phase2Candidate> {
        let k = self.n - c * r;
        let cand = Phase2Candidate { c, r, k };
        (c >= 1 && r >= self.min_r && k >= 3 && k < self.pa && k < r && c < r).then_some(cand)
    }
}

impl Iterator for CandidateStream {
    type Item = Phase2Candidate;

    fn next(&mut self) -> Option<Phase2Candidate> {
        loop {
            match self.stage {
                Stage::Done => return None,
                Stage::Multiples { c, next, floor } => {
                    if next < floor {
                        self.stage = self.multiples_stage(c + 1);
                        continue;
                    }
                    self.stage = Stage::Multiples { c, next: next - 1, floor };
                    if is_prime(next) {
                        if let Some(cand) = self.admit(c, next) {
                            return Some(cand);
                        }
                    }
                }
                Stage::Fallback { t } => {
                    if t <= self.n - self.pa {
                        self.stage = Stage::Done;
                        continue;
                    }
                    self.stage = Stage::Fallback { t: t - 1 };
                    // At most one prime factor can exceed 2*sqrt(n) since t < n.
                    let Some(&(r, _)) = factorize(t).factors().last() else { continue };
                    if r < self.min_r {
                        continue;
                    }
                    let c = t / r;
                    if (2..=self.max_c).contains(&c) {
                        continue;
                    }
                    if let Some(cand) = self.admit(c, r) {
                        return Some(cand);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Every `(c, r)` with `c*r` in the window, by brute force over `r`.
    fn brute_candidates(n: u64, pa: u64) -> HashSet<Phase2Candidate> {
        let min_r = 2 * integer_sqrt(n);
        let mut out = HashSet::new();
        for t in (n - pa + 1)..(n - 2) {
            for r in min_r..=t {
                if t % r == 0 && is_prime(r) {
                    let c = t / r;
                    let k = n - t;
                    if c < r && k < r && k >= 3 && k < pa {
                        out.insert(Phase2Candidate { c, r, k });
                    }
                }
            }
        }
        out
    }

    #[test]
    fn contains_31416_candidate() {
        let all: Vec<_> = enumerate_candidates(31416, 17).collect();
        assert!(all.contains(&Phase2Candidate { c: 4, r: 7853, k: 4 }));
        assert_eq!(all.iter().collect::<HashSet<_>>(), brute_candidates(31416, 17).iter().collect());
        assert_eq!(all.len(), brute_candidates(31416, 17).len());
    }

    #[test]
    fn contains_exceptional_candidate() {
        let n = 199_445_521_968;
        assert!(enumerate_candidates(n, 83)
            .any(|c| c == Phase2Candidate { c: 359, r: 555_558_557, k: 5 }));
    }

    #[test]
    fn small_streams_empty() {
        assert_eq!(enumerate_candidates(12, 4).count(), 0);
        assert_eq!(enumerate_candidates(6, 3).count(), 0);
    }

    #[test]
    fn ordering_c_ascending_then_r_descending() {
        let all: Vec<_> = enumerate_candidates(31416, 17).collect();
        let max_c = 17 / 2;
        let head: Vec<_> = all.iter().take_while(|c| (2..=max_c).contains(&c.c)).collect();
        for w in head.windows(2) {
            assert!(w[0].c < w[1].c || (w[0].c == w[1].c && w[0].r > w[1].r));
        }
    }

    #[test]
    fn matches_brute_force_on_leftover_sample() {
        for &(n, pa) in &[(30u64, 5u64), (31416, 17), (510_510, 17), (720_720, 16)] {
            let got: Vec<_> = enumerate_candidates(n, pa).collect();
            let unique: HashSet<_> = got.iter().copied().collect();
            assert_eq!(unique.len(), got.len(), "duplicates for n = {n}");
            assert_eq!(unique, brute_candidates(n, pa), "n = {n}");
            for c in &got {
                assert!(c.is_consistent(n));
            }
        }
    }
}
