//! Factorization infrastructure.
//!
//! A dense smallest-prime-factor table over `[2, limit]` drives everything
//! else in the crate: factorizations, the classic Liouville function,
//! squarefree kernels, and the bulk sign recurrence in [`crate::sign`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, invalid, Error, Result};

/// Largest accepted sieve limit. Entries are stored as `u32`.
pub const MAX_LIMIT: u64 = (1 << 32) - 1;

/// Smallest-prime-factor table over `[1, limit]`. Immutable once built.
#[derive(Clone)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl fmt::Debug for SpfTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpfTable").field("limit", &self.limit).finish()
    }
}

impl SpfTable {
    pub fn build(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(invalid(format!("sieve limit must be >= 2, got {limit}")));
        }
        if limit > MAX_LIMIT {
            return Err(invalid(format!("sieve limit {limit} exceeds {MAX_LIMIT}")));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] != 0 {
                continue;
            }
            spf[i] = i as u32;
            let Some(start) = i.checked_mul(i) else { continue };
            let mut j = start;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        Ok(Self { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, or `None` for `n < 2` and `n > limit`.
    pub fn spf(&self, n: u64) -> Option<u64> {
        if n < 2 || n > self.limit {
            None
        } else {
            Some(u64::from(self.spf[n as usize]))
        }
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        check_range(n, self.limit)?;
        Ok(n >= 2 && u64::from(self.spf[n as usize]) == n)
    }

    fn check_arg(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(invalid("argument must be positive"));
        }
        check_range(n, self.limit)
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        self.check_arg(n)?;
        let mut pairs: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            pairs.push((p as u64, e));
        }
        Ok(Factorization { pairs })
    }

    /// Classic Liouville function, `(-1)^Ω(n)`.
    pub fn liouville_classic(&self, n: u64) -> Result<i8> {
        self.check_arg(n)?;
        let mut m = n as usize;
        let mut parity = 0u32;
        while m > 1 {
            m /= self.spf[m] as usize;
            parity ^= 1;
        }
        Ok(if parity == 0 { 1 } else { -1 })
    }

    /// Squarefree kernel `c` with `n = c * m^2`, and the number of primes in `c`.
    pub fn squarefree_kernel(&self, n: u64) -> Result<(u64, u32)> {
        let f = self.factorize(n)?;
        let mut kernel = 1u64;
        let mut h = 0u32;
        for &(p, e) in &f.pairs {
            if e % 2 == 1 {
                kernel *= p;
                h += 1;
            }
        }
        Ok((kernel, h))
    }

    /// Primes dividing `n` to an odd power, increasing.
    pub(crate) fn odd_primes_into(&self, n: u64, out: &mut Vec<u64>) {
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut odd = false;
            while m.is_multiple_of(p) {
                m /= p;
                odd = !odd;
            }
            if odd {
                out.push(p as u64);
            }
        }
    }

    /// All divisors of `n`, unsorted.
    pub fn divisors(&self, n: u64) -> Result<Vec<u64>> {
        let f = self.factorize(n)?;
        let mut divs = vec![1u64];
        for &(p, e) in &f.pairs {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        Ok(divs)
    }
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((u128::from(a) * u128::from(b)) % u128::from(n)) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization as `(prime, exponent)` pairs with increasing primes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    pub pairs: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn product(&self) -> u128 {
        self.pairs
            .iter()
            .map(|&(p, e)| u128::from(p).pow(e))
            .product()
    }

    pub fn omega_total(&self) -> u32 {
        self.pairs.iter().map(|&(_, e)| e).sum()
    }
}

/// Strictly increasing positive offsets `i_1 < ... < i_k`. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct OffsetSpec(Vec<u64>);

impl OffsetSpec {
    pub fn new(offsets: Vec<u64>) -> Result<Self> {
        if offsets.first() == Some(&0) {
            return Err(invalid("offsets must be >= 1"));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "offsets must be strictly increasing, got {offsets:?}"
            )));
        }
        Ok(Self(offsets))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn offsets(&self) -> &[u64] {
        &self.0
    }

    /// Number of offsets, `k`.
    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Largest offset, 0 when empty.
    pub fn max_offset(&self) -> u64 {
        self.0.last().copied().unwrap_or(0)
    }

    /// `(0, i_1, ..., i_k)`.
    pub fn with_zero(&self) -> Vec<u64> {
        std::iter::once(0).chain(self.0.iter().copied()).collect()
    }

    /// Exact `x (x + i_1) ... (x + i_k)`; overflow is an error.
    pub fn xi(&self, x: u64) -> Result<u128> {
        if x == 0 {
            return Err(invalid("xi requires x >= 1"));
        }
        self.with_zero().into_iter().try_fold(1u128, |acc, i| {
            let factor = u128::from(x) + u128::from(i);
            acc.checked_mul(factor)
                .ok_or_else(|| Error::Overflow(format!("xi({x}) with offsets {:?}", self.0)))
        })
    }

    /// Every `d >= 1` dividing a nonzero difference of `(0, i_1, ..., i_k)`.
    pub fn common_divisor_set(&self) -> DivisorSet {
        let all = self.with_zero();
        let mut members = BTreeSet::new();
        for (a, &lo) in all.iter().enumerate() {
            for &hi in &all[a + 1..] {
                let diff = hi - lo;
                let mut d = 1;
                while d * d <= diff {
                    if diff % d == 0 {
                        members.insert(d);
                        members.insert(diff / d);
                    }
                    d += 1;
                }
            }
        }
        DivisorSet { members }
    }
}

impl TryFrom<Vec<u64>> for OffsetSpec {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OffsetSpec> for Vec<u64> {
    fn from(s: OffsetSpec) -> Self {
        s.0
    }
}

impl std::str::FromStr for OffsetSpec {
    type Err = Error;

    /// Comma-separated, e.g. `"1,2,5"`; the empty string is the empty spec.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let offsets = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|e| invalid(format!("bad offset {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(offsets)
    }
}

/// The common-divisor set `D` of an offset spec; `r = |D|`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DivisorSet {
    pub members: BTreeSet<u64>,
}

impl DivisorSet {
    pub fn r(&self) -> usize {
        self.members.len()
    }
}
