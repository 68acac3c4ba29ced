//! Equations inside sets of integers: exhaustive refutation of `xy = z` and
//! `xy = c n^k` in `A_Q`, and constructive solvers for `xy = z^2`,
//! `x^2 + y^2 = □` and `u^2 - v^2 = □` in arbitrary sets.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Roots;
use serde::{Deserialize, Serialize};

use crate::bitset::SetBitset;
use crate::error::{check_range, invalid, Error, Result};
use crate::sieve::SpfTable;
use crate::sign::{a_q_set, SignAssignment, SignMode};

pub fn is_square(v: u128) -> bool {
    let r = v.sqrt();
    r * r == v
}

pub fn exact_sqrt(v: u128) -> Option<u128> {
    let r = v.sqrt();
    (r * r == v).then_some(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Exhaustive scan found nothing, as the theory demands.
    Verified,
    /// A solution was found and re-checked.
    Found,
    /// A scan that should be empty found a solution.
    Violation,
    /// The search space was exhausted without a solution.
    NotFound,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Verified | Outcome::Found => 0,
            Outcome::Violation => 3,
            Outcome::NotFound => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub equation: String,
    pub outcome: Outcome,
    pub verified: bool,
    pub witnesses: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub searched_to: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SolutionReport {
    fn new(equation: &str, searched_to: u64) -> Self {
        Self {
            equation: equation.to_string(),
            outcome: Outcome::NotFound,
            verified: false,
            witnesses: BTreeMap::new(),
            method: None,
            searched_to,
            seed: None,
        }
    }

    fn with_witnesses(mut self, w: &[(&str, u64)]) -> Self {
        self.witnesses = w.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        self
    }

    pub fn witness(&self, name: &str) -> Option<u64> {
        self.witnesses.get(name).copied()
    }
}

fn seed_of(a: &SignAssignment) -> Option<u64> {
    (a.mode == SignMode::Random).then_some(a.seed)
}

/// `S_a = { n : a n ∈ S }` on `[1, ⌊limit / a⌋]`.
pub fn dilation(set: &SetBitset, a: u64) -> Result<SetBitset> {
    if a == 0 {
        return Err(invalid("dilation factor must be >= 1"));
    }
    if a == 1 {
        return Ok(set.clone());
    }
    let limit = set.limit() / a;
    Ok(SetBitset::from_predicate(limit, |n| set.contains(a * n)))
}

/// Exhaustive scan for `xy = z` with `x <= y` and all three in `set ∩ [1, N]`.
pub fn scan_schur(set: &SetBitset, n: u64) -> Result<SolutionReport> {
    check_range(n, set.limit())?;
    let mut report = SolutionReport::new("schur", n);
    for x in set.iter().take_while(|&x| x.saturating_mul(x) <= n) {
        for y in x..=n / x {
            if set.contains(y) && set.contains(x * y) {
                report.outcome = Outcome::Violation;
                return Ok(report.with_witnesses(&[("x", x), ("y", y), ("z", x * y)]));
            }
        }
    }
    report.outcome = Outcome::Verified;
    report.verified = true;
    Ok(report)
}

/// `xy = z` has no solution in `A_Q`: `λ_Q(xy) = λ_Q(x) λ_Q(y) = +1`.
pub fn verify_multiplicative_schur(
    assignment: &SignAssignment,
    n: u64,
    table: &SpfTable,
) -> Result<SolutionReport> {
    let set = a_q_set(assignment, n, table)?;
    let mut r = scan_schur(&set, n)?;
    r.seed = seed_of(assignment);
    Ok(r)
}

/// Scans every `m = c n^k <= N` and each factorization `m = x y` for `x, y`
/// both in `A_Q`.
pub fn verify_cnk(
    assignment: &SignAssignment,
    c: u64,
    k: u32,
    n: u64,
    table: &SpfTable,
) -> Result<SolutionReport> {
    if c == 0 || is_square(u128::from(c)) {
        return Err(invalid(format!("c = {c} must be a positive non-square")));
    }
    if k == 0 || k % 2 == 1 {
        return Err(invalid(format!("k = {k} must be even and positive")));
    }
    check_range(n, table.limit())?;
    if c > n {
        return Err(invalid(format!("c = {c} exceeds N = {n}")));
    }
    if assignment.lambda_q(c, table)? != -1 {
        return Err(Error::PreconditionFailed(format!(
            "λ_Q({c}) = +1 for this assignment; reseed until λ_Q(c) = -1"
        )));
    }
    let set = a_q_set(assignment, n, table)?;
    let mut report = SolutionReport::new(&format!("cnk(c={c},k={k})"), n);
    report.seed = seed_of(assignment);
    let mut base = 1u64;
    while let Some(m) = base.checked_pow(k).and_then(|p| p.checked_mul(c)).filter(|&m| m <= n) {
        let mut divs = table.divisors(m)?;
        divs.sort_unstable();
        for &x in &divs {
            let y = m / x;
            if set.contains(x) && set.contains(y) {
                report.outcome = Outcome::Violation;
                return Ok(report.with_witnesses(&[("x", x), ("y", y), ("n", base)]));
            }
        }
        base += 1;
    }
    report.outcome = Outcome::Verified;
    report.verified = true;
    Ok(report)
}

/// Smallest 3-term progression `a < b < c` inside a sorted exponent list,
/// ordered by `c` then `a`.
fn smallest_progression(exps: &[u32]) -> Option<(u32, u32, u32)> {
    for (ci, &c) in exps.iter().enumerate() {
        for &a in &exps[..ci] {
            if (a + c) % 2 == 0 && exps[..ci].binary_search(&((a + c) / 2)).is_ok() {
                return Some((a, (a + c) / 2, c));
            }
        }
    }
    None
}

/// Pairwise distinct `x, y, z ∈ set ∩ [1, N]` with `xy = z^2`.
///
/// First tries the dyadic route: for each odd base `n`, look for a 3-term
/// progression among `{ e : n 2^e ∈ set }`. If no base has one, falls back to
/// a same-square-class search `x = c m1^2`, `y = c m2^2`, `z = c m1 m2`.
pub fn solve_xy_z2(set: &SetBitset, n: u64) -> Result<SolutionReport> {
    check_range(n, set.limit())?;
    let mut report = SolutionReport::new("xyz2", n);
    let mut found = None;

    let mut base = 1u64;
    while base <= n && found.is_none() {
        let mut exps = Vec::new();
        let mut v = base;
        let mut e = 0u32;
        while v <= n {
            if set.contains(v) {
                exps.push(e);
            }
            e += 1;
            v = match v.checked_mul(2) {
                Some(v) => v,
                None => break,
            };
        }
        if let Some((a, b, c)) = smallest_progression(&exps) {
            found = Some((base << a, base << c, base << b, "dyadic"));
        }
        base += 2;
    }

    if found.is_none() && n >= 2 {
        found = same_class_search(set, n)?.map(|(x, y, z)| (x, y, z, "square-class"));
    }

    if let Some((x, y, z, method)) = found {
        report = report.with_witnesses(&[("x", x), ("y", y), ("z", z)]);
        report.method = Some(method.to_string());
        report.verified = u128::from(x) * u128::from(y) == u128::from(z) * u128::from(z)
            && x != y
            && y != z
            && x != z
            && [x, y, z].iter().all(|&w| set.contains(w));
        report.outcome = if report.verified { Outcome::Found } else { Outcome::NotFound };
    }
    Ok(report)
}

fn same_class_search(set: &SetBitset, n: u64) -> Result<Option<(u64, u64, u64)>> {
    let table = SpfTable::build(n)?;
    let mut classes: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for v in set.iter().take_while(|&v| v <= n) {
        let (kernel, _) = table.squarefree_kernel(v)?;
        let root = (v / kernel).sqrt();
        classes.entry(kernel).or_default().push(root);
    }
    for (c, roots) in &classes {
        for (j, &m2) in roots.iter().enumerate() {
            for &m1 in &roots[..j] {
                let z = c * m1 * m2;
                if set.contains(z) {
                    return Ok(Some((c * m1 * m1, c * m2 * m2, z)));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripleKind {
    /// `a^2 + b^2`, `a^2 + c^2`, `b^2 + c^2` all squares.
    Sum,
    /// `b^2 - a^2`, `c^2 - a^2`, `c^2 - b^2` all squares.
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MagicTriple {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub kind: TripleKind,
}

impl MagicTriple {
    pub const DEFAULT_SUM: MagicTriple = MagicTriple { a: 44, b: 117, c: 240, kind: TripleKind::Sum };
    pub const DEFAULT_DIFFERENCE: MagicTriple =
        MagicTriple { a: 153, b: 185, c: 697, kind: TripleKind::Difference };

    pub fn new(a: u64, b: u64, c: u64, kind: TripleKind) -> Result<Self> {
        if !(0 < a && a < b && b < c) {
            return Err(invalid(format!("triple must satisfy 0 < a < b < c, got ({a}, {b}, {c})")));
        }
        Ok(Self { a, b, c, kind })
    }

    pub fn parse(s: &str, kind: TripleKind) -> Result<Self> {
        let v: Vec<u64> = s
            .split(',')
            .map(|t| t.trim().parse().map_err(|e| invalid(format!("bad triple entry {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        match v.as_slice() {
            &[a, b, c] => Self::new(a, b, c, kind),
            _ => Err(invalid(format!("triple needs three entries, got {s:?}"))),
        }
    }

    /// The three pairwise sums or differences of squares, in the order
    /// `(a, b)`, `(a, c)`, `(b, c)`.
    pub fn values(&self) -> [u128; 3] {
        let sq = |v: u64| u128::from(v) * u128::from(v);
        let f = |x: u64, y: u64| match self.kind {
            TripleKind::Sum => sq(x) + sq(y),
            TripleKind::Difference => sq(y) - sq(x),
        };
        [f(self.a, self.b), f(self.a, self.c), f(self.b, self.c)]
    }

    pub fn verify(&self) -> bool {
        self.a < self.b && self.b < self.c && self.values().iter().all(|&v| is_square(v))
    }
}

impl fmt::Display for MagicTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.c)
    }
}

impl FromStr for TripleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Self::Sum),
            "difference" | "diff" => Ok(Self::Difference),
            _ => Err(invalid(format!("unknown triple kind {s:?}"))),
        }
    }
}

pub fn verify_magic_triple(t: &MagicTriple) -> bool {
    t.verify()
}

/// Every triple `a < b < c <= limit` of the given kind, sorted.
pub fn find_magic_triples(limit: u64, kind: TripleKind) -> Vec<MagicTriple> {
    if limit < 3 {
        return Vec::new();
    }
    let good = |x: u64, y: u64| {
        let (x, y) = (u128::from(x), u128::from(y));
        is_square(match kind {
            TripleKind::Sum => x * x + y * y,
            TripleKind::Difference => y * y - x * x,
        })
    };
    let partners: Vec<Vec<u64>> = (0..=limit)
        .map(|a| if a == 0 { Vec::new() } else { (a + 1..=limit).filter(|&b| good(a, b)).collect() })
        .collect();
    let mut out = Vec::new();
    for a in 1..=limit {
        let pa = &partners[a as usize];
        for (i, &b) in pa.iter().enumerate() {
            let pb = &partners[b as usize];
            for &c in &pa[i + 1..] {
                if pb.binary_search(&c).is_ok() {
                    out.push(MagicTriple { a, b, c, kind });
                }
            }
        }
    }
    out
}

fn triple_search(set: &SetBitset, n: u64, triple: &MagicTriple, equation: &str) -> Result<SolutionReport> {
    if !triple.verify() {
        return Err(invalid(format!("({triple}) is not a valid {:?} triple", triple.kind)));
    }
    check_range(n, set.limit())?;
    let mut report = SolutionReport::new(equation, n);
    let MagicTriple { a, b, c, kind } = *triple;
    let pairs = match kind {
        TripleKind::Sum => [(a, b), (a, c), (b, c)],
        TripleKind::Difference => [(b, a), (c, a), (c, b)],
    };
    let mut z = 1u64;
    while z.checked_mul(a).is_some_and(|za| za <= n) {
        for &(p, q) in &pairs {
            let (Some(x), Some(y)) = (z.checked_mul(p), z.checked_mul(q)) else { continue };
            if x <= n && y <= n && set.contains(x) && set.contains(y) {
                let (sx, sy) = (u128::from(x) * u128::from(x), u128::from(y) * u128::from(y));
                let value = match kind {
                    TripleKind::Sum => sx + sy,
                    TripleKind::Difference => sx - sy,
                };
                let root = exact_sqrt(value);
                let (xn, yn) = match kind {
                    TripleKind::Sum => ("x", "y"),
                    TripleKind::Difference => ("u", "v"),
                };
                report = report.with_witnesses(&[
                    (xn, x),
                    (yn, y),
                    ("root", root.unwrap_or(0) as u64),
                    ("scale", z),
                ]);
                report.method = Some(format!("magic-triple({triple})"));
                report.verified = root.is_some();
                report.outcome = if report.verified { Outcome::Found } else { Outcome::NotFound };
                return Ok(report);
            }
        }
        z += 1;
    }
    Ok(report)
}

/// `x, y ∈ set` with `x^2 + y^2` a perfect square, from dilations of a sum triple.
pub fn solve_sum_of_squares(set: &SetBitset, n: u64, triple: &MagicTriple) -> Result<SolutionReport> {
    if triple.kind != TripleKind::Sum {
        return Err(invalid("sum-of-squares solver needs a sum triple"));
    }
    triple_search(set, n, triple, "sumsq")
}

/// `u > v` in `set` with `u^2 - v^2` a perfect square, from a difference triple.
pub fn solve_diff_of_squares(set: &SetBitset, n: u64, triple: &MagicTriple) -> Result<SolutionReport> {
    if triple.kind != TripleKind::Difference {
        return Err(invalid("difference-of-squares solver needs a difference triple"));
    }
    triple_search(set, n, triple, "diffsq")
}
