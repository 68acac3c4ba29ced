//! Seed-keyed prime signs, the random Liouville function `λ_Q`, and its
//! negative set `A_Q = { n : λ_Q(n) = -1 }`.
//!
//! Each prime `p` gets the lowest bit of `splitmix64(seed ^ p)`: 1 puts `p`
//! in `Q` (sign -1). The map is a pure function of `(seed, p)`, so any limit
//! sees the same assignment.

use serde::{Deserialize, Serialize};

use crate::bitset::SetBitset;
use crate::error::{check_range, invalid, Result};
use crate::sieve::{is_prime_u64, SpfTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    #[default]
    Random,
    /// Every prime gets -1; recovers the classic Liouville function.
    #[serde(alias = "all-primes-negative")]
    Classic,
}

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignAssignment {
    pub seed: u64,
    pub mode: SignMode,
}

impl SignAssignment {
    pub fn random(seed: u64) -> Self {
        Self { seed, mode: SignMode::Random }
    }

    pub fn classic() -> Self {
        Self { seed: 0, mode: SignMode::Classic }
    }

    /// Whether prime `p` lies in `Q`. No primality check.
    #[inline]
    pub fn in_q(&self, p: u64) -> bool {
        match self.mode {
            SignMode::Classic => true,
            SignMode::Random => splitmix64(self.seed ^ p) & 1 == 1,
        }
    }

    pub fn sign_of_prime(&self, p: u64) -> Result<i8> {
        if !is_prime_u64(p) {
            return Err(invalid(format!("{p} is not prime")));
        }
        Ok(if self.in_q(p) { -1 } else { 1 })
    }

    /// `λ_Q(n)` by factorization.
    pub fn lambda_q(&self, n: u64, table: &SpfTable) -> Result<i8> {
        let f = table.factorize(n)?;
        let neg = f
            .pairs
            .iter()
            .filter(|&&(p, e)| e % 2 == 1 && self.in_q(p))
            .count();
        Ok(if neg % 2 == 0 { 1 } else { -1 })
    }
}

/// Parses a seed as decimal or `0x`-prefixed hex.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse::<u64>(),
    };
    parsed.map_err(|e| invalid(format!("bad seed {s:?}: {e}")))
}

/// `λ_Q` on `[1, limit]`, one bit per integer (set bit means -1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedSequence {
    negative: SetBitset,
}

impl SignedSequence {
    pub fn build(assignment: &SignAssignment, limit: u64, table: &SpfTable) -> Result<Self> {
        if limit == 0 {
            return Err(invalid("sequence limit must be >= 1"));
        }
        check_range(limit, table.limit())?;
        let mut negative = SetBitset::empty(limit);
        for n in 2..=limit {
            let p = table.spf(n).expect("n within table");
            let rest = n / p;
            if assignment.in_q(p) != negative.contains(rest) {
                negative.insert(n);
            }
        }
        Ok(Self { negative })
    }

    /// Wrap an arbitrary ±1 sequence given by its negative set.
    pub fn from_negative_set(negative: SetBitset) -> Self {
        Self { negative }
    }

    pub fn constant_plus(limit: u64) -> Self {
        Self { negative: SetBitset::empty(limit) }
    }

    pub fn limit(&self) -> u64 {
        self.negative.limit()
    }

    /// Panics outside `[1, limit]`.
    #[inline]
    pub fn sign(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.limit());
        if self.negative.contains(n) {
            -1
        } else {
            1
        }
    }

    pub fn negative_set(&self) -> &SetBitset {
        &self.negative
    }

    pub fn into_negative_set(self) -> SetBitset {
        self.negative
    }

    /// Sum of signs over `[1, n]`.
    pub fn partial_sum(&self, n: u64) -> i64 {
        let neg = self.negative.count_upto(n) as i64;
        n as i64 - 2 * neg
    }
}

/// `A_Q ∩ [1, limit]`.
pub fn a_q_set(assignment: &SignAssignment, limit: u64, table: &SpfTable) -> Result<SetBitset> {
    Ok(SignedSequence::build(assignment, limit, table)?.into_negative_set())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> SpfTable {
        SpfTable::build(100_000).unwrap()
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0,
        // whose n-th output is the finalizer applied to n * golden gamma.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn sign_of_prime_modes() {
        let c = SignAssignment::classic();
        assert_eq!(c.sign_of_prime(7).unwrap(), -1);
        let r = SignAssignment::random(42);
        assert_eq!(r.sign_of_prime(101).unwrap(), r.sign_of_prime(101).unwrap());
        assert!(r.sign_of_prime(1).is_err());
        assert!(r.sign_of_prime(0).is_err());
        assert!(r.sign_of_prime(91).is_err());
    }

    #[test]
    fn first_ten_thousand_primes_are_balanced() {
        let t = SpfTable::build(200_000).unwrap();
        let primes: Vec<u64> = (2..=200_000u64).filter(|&n| t.is_prime(n).unwrap()).take(10_000).collect();
        assert_eq!(primes.len(), 10_000);
        for seed in 0..10u64 {
            let a = SignAssignment::random(seed);
            let neg = primes.iter().filter(|&&p| a.in_q(p)).count();
            let frac = neg as f64 / 10_000.0;
            assert!((0.485..=0.515).contains(&frac), "seed {seed}: {frac}");
        }
    }

    #[test]
    fn classic_sequence_first_ten() {
        let t = table();
        let seq = SignedSequence::build(&SignAssignment::classic(), 10, &t).unwrap();
        let signs: Vec<i8> = (1..=10).map(|n| seq.sign(n)).collect();
        assert_eq!(signs, vec![1, -1, -1, 1, -1, 1, -1, -1, 1, 1]);
        let members: Vec<u64> = seq.negative_set().iter().collect();
        assert_eq!(members, vec![2, 3, 5, 7, 8]);
        let one = SignedSequence::build(&SignAssignment::random(3), 1, &t).unwrap();
        assert_eq!(one.sign(1), 1);
    }

    #[test]
    fn classic_mode_matches_liouville() {
        let t = table();
        let seq = SignedSequence::build(&SignAssignment::classic(), 100_000, &t).unwrap();
        for n in 1..=100_000u64 {
            assert_eq!(seq.sign(n), t.liouville_classic(n).unwrap());
            assert_eq!(SignAssignment::classic().lambda_q(n, &t).unwrap(), seq.sign(n));
        }
    }

    #[test]
    fn squares_are_never_members() {
        let t = table();
        let a = a_q_set(&SignAssignment::random(0), 100_000, &t).unwrap();
        for m in 1..=316u64 {
            assert!(!a.contains(m * m));
        }
    }

    #[test]
    fn seeds_parse_in_both_radixes() {
        assert_eq!(parse_seed("17").unwrap(), 17);
        assert_eq!(parse_seed("0x1F").unwrap(), 31);
        assert!(parse_seed("zz").is_err());
    }

    #[test]
    fn out_of_range_limit() {
        let t = SpfTable::build(100).unwrap();
        assert!(SignedSequence::build(&SignAssignment::random(0), 101, &t).is_err());
        assert!(SignAssignment::random(0).lambda_q(101, &t).is_err());
    }

    proptest! {
        #[test]
        fn sieve_recurrence_matches_pointwise(seed: u64, idx in proptest::collection::vec(1u64..=20_000, 50)) {
            let t = SpfTable::build(20_000).unwrap();
            let a = SignAssignment::random(seed);
            let seq = SignedSequence::build(&a, 20_000, &t).unwrap();
            for n in idx {
                prop_assert_eq!(seq.sign(n), a.lambda_q(n, &t).unwrap());
            }
        }

        #[test]
        fn completely_multiplicative(seed: u64, m in 1u64..=300, n in 1u64..=300) {
            let t = SpfTable::build(90_000).unwrap();
            let a = SignAssignment::random(seed);
            let lm = a.lambda_q(m, &t).unwrap();
            let ln = a.lambda_q(n, &t).unwrap();
            prop_assert_eq!(a.lambda_q(m * n, &t).unwrap(), lm * ln);
            prop_assert_eq!(a.lambda_q(m * m, &t).unwrap(), 1);
        }
    }
}
