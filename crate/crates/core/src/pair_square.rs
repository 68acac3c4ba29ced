//! Square classes of `ξ(x) = x (x + i_1) ... (x + i_k)` and exact second
//! moments of the correlation average.
//!
//! For random signs, `E(φ(x) φ(y))` is 1 when `ξ(x) ξ(y)` is a perfect square
//! and 0 otherwise, so `E(T_N^2)` is the number of such ordered pairs divided
//! by `N^2`. Pairs are counted by grouping `x` on its square class and
//! summing squared group sizes.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_range, invalid, Result};
use crate::sieve::{is_prime_u64, OffsetSpec, SpfTable};
use crate::sign::{SignAssignment, SignedSequence};

/// Primes with odd exponent in `ξ(x)`, increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct SquareClass(pub Vec<u64>);

impl SquareClass {
    /// `h`: number of primes in the squarefree part.
    pub fn h(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn primes(&self) -> &[u64] {
        &self.0
    }
}

fn check_window(n: u64, spec: &OffsetSpec, table: &SpfTable) -> Result<()> {
    if n == 0 {
        return Err(invalid("N must be >= 1"));
    }
    check_range(n + spec.max_offset(), table.limit())
}

/// Square class of `ξ(x)` from per-factor parities; `ξ(x)` is never formed.
pub fn square_class(x: u64, spec: &OffsetSpec, table: &SpfTable) -> Result<SquareClass> {
    check_window(x, spec, table)?;
    Ok(square_class_unchecked(x, spec, table))
}

fn square_class_unchecked(x: u64, spec: &OffsetSpec, table: &SpfTable) -> SquareClass {
    let mut primes = Vec::new();
    table.odd_primes_into(x, &mut primes);
    for &i in spec.offsets() {
        table.odd_primes_into(x + i, &mut primes);
    }
    primes.sort_unstable();
    let mut out: Vec<u64> = Vec::with_capacity(primes.len());
    for p in primes {
        if out.last() == Some(&p) {
            out.pop();
        } else {
            out.push(p);
        }
    }
    SquareClass(out)
}

fn classes_upto(n: u64, spec: &OffsetSpec, table: &SpfTable) -> Vec<SquareClass> {
    (1..=n)
        .into_par_iter()
        .map(|x| square_class_unchecked(x, spec, table))
        .collect()
}

fn group_sizes(classes: &[SquareClass]) -> HashMap<&SquareClass, u64> {
    let mut groups: HashMap<&SquareClass, u64> = HashMap::with_capacity(classes.len());
    for c in classes {
        *groups.entry(c).or_insert(0) += 1;
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairCountResult {
    pub n: u64,
    pub offsets: OffsetSpec,
    /// Ordered pairs `(x, y)` in `[1, N]^2` with `ξ(x) ξ(y)` a square.
    pub pair_count: u64,
}

impl PairCountResult {
    /// Exact `E(T_N^2) = pair_count / N^2`.
    pub fn e_tn2(&self) -> Ratio<u128> {
        Ratio::new(u128::from(self.pair_count), u128::from(self.n) * u128::from(self.n))
    }

    pub fn e_tn2_f64(&self) -> f64 {
        self.pair_count as f64 / (self.n as f64 * self.n as f64)
    }
}

pub fn count_square_pairs(n: u64, spec: &OffsetSpec, table: &SpfTable) -> Result<PairCountResult> {
    check_window(n, spec, table)?;
    let classes = classes_upto(n, spec, table);
    let pair_count = group_sizes(&classes).values().map(|&s| s * s).sum();
    Ok(PairCountResult { n, offsets: spec.clone(), pair_count })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundViolation {
    pub x: u64,
    pub matches: u64,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub n: u64,
    pub r: usize,
    pub violations: Vec<BoundViolation>,
}

/// For every `x <= N`, checks that the number of `y <= N` sharing the square
/// class of `ξ(x)` is at most `2^r 2^h(x) √N`, compared as
/// `matches^2 <= 4^(r + h) N`.
pub fn per_x_bound_check(n: u64, spec: &OffsetSpec, table: &SpfTable) -> Result<BoundCheck> {
    check_window(n, spec, table)?;
    let r = spec.common_divisor_set().r();
    let classes = classes_upto(n, spec, table);
    let groups = group_sizes(&classes);
    let violations = classes
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let matches = groups[c];
            let shift = 2 * (r as u32 + c.h());
            // 4^(r+h) N >= 2^127 exceeds any matches^2 <= N^2 here.
            let bound_ok = shift >= 64
                || u128::from(matches) * u128::from(matches) <= (u128::from(n) << shift);
            (!bound_ok).then(|| BoundViolation { x: i as u64 + 1, matches, h: c.h() })
        })
        .collect();
    Ok(BoundCheck { n, r, violations })
}

/// Exponent appearing in the `Σ 2^h(n)` growth bound.
pub const SUM_2H_EXPONENT: f64 = 1.45;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sum2hReport {
    pub n: u64,
    pub offsets: OffsetSpec,
    /// `Σ_{n=1}^{N} 2^h(ξ(n))`.
    pub sum: u128,
    /// Smallest prime `p` with `(k + 1) / log2(p) <= 0.45`.
    pub smallest_p: u64,
    /// Number of primes `<= smallest_p` (its 1-based index among primes).
    pub smallest_p_index: Option<u64>,
    /// Least-squares slope of `ln Σ` against `ln N` over dyadic checkpoints.
    pub fitted_exponent: Option<f64>,
    pub exponent_bound: f64,
}

/// Smallest prime `p` with `(k + 1) / log2(p) <= 0.45`, decided exactly as
/// `2^(20 (k + 1)) <= p^9`.
pub fn smallest_prime_for_exponent(k: usize) -> u64 {
    let target = BigUint::from(1u8) << (20 * (k + 1));
    let approx = 2f64.powf((k + 1) as f64 / 0.45);
    let mut p = (approx.floor() as u64).saturating_sub(2).max(2);
    loop {
        if is_prime_u64(p) && BigUint::from(p).pow(9) >= target {
            return p;
        }
        p += 1;
    }
}

fn prime_index(p: u64) -> Option<u64> {
    if p > 100_000_000 {
        return None;
    }
    let n = p as usize;
    let mut composite = vec![false; n + 1];
    let mut count = 0;
    for i in 2..=n {
        if !composite[i] {
            count += 1;
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    Some(count)
}

pub fn sum_2h(n: u64, spec: &OffsetSpec, table: &SpfTable) -> Result<Sum2hReport> {
    check_window(n, spec, table)?;
    let hs: Vec<u32> = (1..=n)
        .into_par_iter()
        .map(|x| square_class_unchecked(x, spec, table).h())
        .collect();

    let mut checkpoints = Vec::new();
    let mut sum = 0u128;
    let mut next = 16u64;
    for (i, &h) in hs.iter().enumerate() {
        sum += 1u128 << h;
        let x = i as u64 + 1;
        if x == next || x == n {
            checkpoints.push((x as f64, sum as f64));
            if x == next {
                next *= 2;
            }
        }
    }
    checkpoints.dedup_by(|a, b| a.0 == b.0);
    let smallest_p = smallest_prime_for_exponent(spec.k());
    Ok(Sum2hReport {
        n,
        offsets: spec.clone(),
        sum,
        smallest_p,
        smallest_p_index: prime_index(smallest_p),
        fitted_exponent: loglog_slope(&checkpoints),
        exponent_bound: SUM_2H_EXPONENT,
    })
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// distinct abscissae.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: u64,
    pub pair_count: u64,
    pub e_tn2: f64,
}

/// Exact `E(T_N^2)` at each `N`, plus the fitted log-log slope.
pub fn decay_table(ns: &[u64], spec: &OffsetSpec, table: &SpfTable) -> Result<(Vec<DecayRow>, Option<f64>)> {
    let rows = ns
        .iter()
        .map(|&n| {
            let r = count_square_pairs(n, spec, table)?;
            Ok(DecayRow { n, pair_count: r.pair_count, e_tn2: r.e_tn2_f64() })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.e_tn2)).collect();
    let slope = loglog_slope(&pts);
    Ok((rows, slope))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSample {
    pub seed: u64,
    /// `Σ_{n<=N} φ(n)`; `T_N^2 = sum^2 / N^2`.
    pub sum: i64,
    pub t_n_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub n: u64,
    pub offsets: OffsetSpec,
    pub mean: f64,
    pub stderr: f64,
    pub samples: Vec<SeedSample>,
}

/// Sample mean and standard error of `T_N^2` across random sign assignments.
pub fn monte_carlo_e_tn2(
    n: u64,
    spec: &OffsetSpec,
    seeds: &[u64],
    table: &SpfTable,
) -> Result<MonteCarloResult> {
    check_window(n, spec, table)?;
    if seeds.len() < 2 {
        return Err(invalid("monte carlo needs at least two seeds"));
    }
    let limit = n + spec.max_offset();
    let samples = seeds
        .par_iter()
        .map(|&seed| {
            let seq = SignedSequence::build(&SignAssignment::random(seed), limit, table)?;
            let sum = crate::normality::correlation_sum(&seq, spec, n)?.sum;
            let t = sum as f64 / n as f64;
            Ok(SeedSample { seed, sum, t_n_squared: t * t })
        })
        .collect::<Result<Vec<_>>>()?;
    let k = samples.len() as f64;
    let mean = samples.iter().map(|s| s.t_n_squared).sum::<f64>() / k;
    let var = samples.iter().map(|s| (s.t_n_squared - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(MonteCarloResult {
        n,
        offsets: spec.clone(),
        mean,
        stderr: (var / k).sqrt(),
        samples,
    })
}

/// Witness for `y = m(S1) m(S2) s^2` with `S1 ⊆ D` and `S2` inside the
/// square class of `ξ(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartnerDecomposition {
    pub s1: Vec<u64>,
    pub s2: Vec<u64>,
    pub root: u64,
}

/// Searches all subset pairs for a decomposition of `y` relative to `x`.
pub fn decompose_partner(
    x: u64,
    y: u64,
    spec: &OffsetSpec,
    table: &SpfTable,
) -> Result<Option<PartnerDecomposition>> {
    check_window(x.max(y), spec, table)?;
    let d: Vec<u64> = spec.common_divisor_set().members.into_iter().collect();
    let class = square_class_unchecked(x, spec, table).0;
    if d.len() + class.len() > 24 {
        return Err(invalid("subset search too large"));
    }
    let product = |items: &[u64], mask: u32| -> Option<u64> {
        items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .try_fold(1u64, |acc, (_, &v)| acc.checked_mul(v))
    };
    for m1 in 0u32..(1 << d.len()) {
        let Some(a) = product(&d, m1) else { continue };
        if !y.is_multiple_of(a) {
            continue;
        }
        for m2 in 0u32..(1 << class.len()) {
            let Some(b) = product(&class, m2) else { continue };
            let Some(ab) = a.checked_mul(b) else { continue };
            if !y.is_multiple_of(ab) {
                continue;
            }
            let q = y / ab;
            let root = num_integer::Roots::sqrt(&q);
            if root * root == q {
                let pick = |items: &[u64], mask: u32| {
                    items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect()
                };
                return Ok(Some(PartnerDecomposition { s1: pick(&d, m1), s2: pick(&class, m2), root }));
            }
        }
    }
    Ok(None)
}
