//! Word frequencies, correlation sums and their finite identity.
//!
//! Window conventions:
//!
//! * words of length `m` are counted at start positions `1..=N-m+1`, with
//!   that many positions as the denominator;
//! * a standalone correlation sum averages `n = 1..=N` with denominator `N`;
//! * inside [`word_freq_via_correlations`] every correlation term uses the
//!   word window, which turns the frequency/correlation equivalence into an
//!   exact identity at finite `N`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::SetBitset;
use crate::error::{check_range, invalid, Error, Result};
use crate::sieve::OffsetSpec;
use crate::sign::SignedSequence;

pub const MAX_WORD_LEN: u32 = 24;

const BLOCK: u64 = 1 << 16;

/// Binary word; the first letter is the most significant of `len` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    code: u32,
    len: u32,
}

impl Word {
    pub fn new(code: u32, len: u32) -> Result<Self> {
        if len == 0 || len > MAX_WORD_LEN {
            return Err(invalid(format!("word length must be in 1..={MAX_WORD_LEN}")));
        }
        if u64::from(code) >> len != 0 {
            return Err(invalid(format!("code {code} does not fit {len} bits")));
        }
        Ok(Self { code, len })
    }

    pub fn code(&self) -> u32 {
        self.code
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Letter at position `j`, 0-based from the left.
    pub fn letter(&self, j: u32) -> bool {
        (self.code >> (self.len - 1 - j)) & 1 == 1
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut code = 0u32;
        for c in s.chars() {
            code = code.checked_shl(1).unwrap_or(0)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(invalid(format!("bad letter {c:?} in word {s:?}"))),
                };
        }
        Word::new(code, s.len() as u32)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            f.write_str(if self.letter(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Exact occurrence counts of every word of length `1..=max_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordStats {
    n: u64,
    max_len: u32,
    // counts[len - 1][code]
    counts: Vec<Vec<u64>>,
}

impl WordStats {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    /// Number of start positions for words of length `len`.
    pub fn window(&self, len: u32) -> u64 {
        self.n + 1 - u64::from(len)
    }

    pub fn count(&self, w: Word) -> u64 {
        self.counts[(w.len - 1) as usize][w.code as usize]
    }

    pub fn counts_of_len(&self, len: u32) -> &[u64] {
        &self.counts[(len - 1) as usize]
    }

    pub fn freq(&self, w: Word) -> Ratio<u64> {
        Ratio::new(self.count(w), self.window(w.len))
    }

    /// `|freq(w) - 2^-|w||` as an exact ratio.
    pub fn deviation(&self, w: Word) -> Ratio<u128> {
        let scaled = u128::from(self.count(w)) << w.len;
        let win = u128::from(self.window(w.len));
        Ratio::new(scaled.abs_diff(win), win << w.len)
    }
}

pub fn word_frequencies(set: &SetBitset, max_len: u32, n: u64) -> Result<WordStats> {
    if max_len == 0 || max_len > MAX_WORD_LEN {
        return Err(invalid(format!("max word length must be in 1..={MAX_WORD_LEN}, got {max_len}")));
    }
    check_range(n, set.limit())?;
    if n < u64::from(max_len) {
        return Err(invalid(format!("N = {n} shorter than max word length {max_len}")));
    }

    let chunks = rayon::current_num_threads().max(1) as u64;
    let per = n.div_ceil(chunks).max(1);
    let ranges: Vec<(u64, u64)> = (0..chunks)
        .map(|c| (1 + c * per, ((c + 1) * per).min(n)))
        .filter(|(a, b)| a <= b)
        .collect();

    let empty = || -> Vec<Vec<u64>> { (1..=max_len).map(|l| vec![0u64; 1 << l]).collect() };
    let counts = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut counts = empty();
            count_words_ending_in(set, max_len, lo, hi, &mut counts);
            counts
        })
        .reduce(empty, |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(b) {
                ra.iter_mut().zip(rb).for_each(|(x, y)| *x += y);
            }
            a
        });
    Ok(WordStats { n, max_len, counts })
}

// Counts every word whose last letter sits at a position in [lo, hi].
fn count_words_ending_in(set: &SetBitset, max_len: u32, lo: u64, hi: u64, counts: &mut [Vec<u64>]) {
    let max_len = u64::from(max_len);
    let mut code = 0u32;
    let first = lo.saturating_sub(max_len - 1).max(1);
    for p in first..lo {
        code = (code << 1) | u32::from(set.contains(p));
    }
    for e in lo..=hi {
        code = (code << 1) | u32::from(set.contains(e));
        let avail = e.min(max_len);
        for len in 1..=avail {
            let mask = (1u32 << len) - 1;
            counts[(len - 1) as usize][(code & mask) as usize] += 1;
        }
    }
}

/// Sum over `n` in `[start, start + count)` of `Π_{o in shifts} sign(n + o)`.
fn signed_product_sum(seq: &SignedSequence, shifts: &[u64], start: u64, count: u64) -> i64 {
    let blocks: Vec<u64> = (0..count.div_ceil(BLOCK)).collect();
    blocks
        .par_iter()
        .map(|&b| {
            let s = start + b * BLOCK;
            let c = BLOCK.min(start + count - s);
            let odd = seq.negative_set().xor_parity_count(shifts, s, c);
            c as i64 - 2 * odd as i64
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub offsets: OffsetSpec,
    pub n: u64,
    /// `Σ_{n=1}^{N} λ(n) λ(n + i_1) ... λ(n + i_k)`.
    pub sum: i64,
}

impl CorrelationResult {
    pub fn value(&self) -> Ratio<i64> {
        Ratio::new(self.sum, self.n as i64)
    }

    pub fn as_f64(&self) -> f64 {
        self.sum as f64 / self.n as f64
    }
}

pub fn correlation_sum(seq: &SignedSequence, spec: &OffsetSpec, n: u64) -> Result<CorrelationResult> {
    if n == 0 {
        return Err(invalid("N must be >= 1"));
    }
    check_range(n + spec.max_offset(), seq.limit())?;
    let shifts = spec.with_zero();
    Ok(CorrelationResult {
        offsets: spec.clone(),
        n,
        sum: signed_product_sum(seq, &shifts, 1, n),
    })
}

/// Frequency of `word` in the negative set of `seq`, computed only from
/// correlation sums over the word window via
/// `freq(w) = 2^-m Σ_S (Π_{j∈S} ε_j) C(S)`, `ε_j = -1` where `w_j = 1`.
pub fn word_freq_via_correlations(seq: &SignedSequence, word: Word, n: u64) -> Result<Ratio<u64>> {
    check_range(n, seq.limit())?;
    let m = word.len();
    if n < u64::from(m) {
        return Err(invalid(format!("N = {n} shorter than word length {m}")));
    }
    let window = n + 1 - u64::from(m);
    let mut total: i128 = 0;
    for subset in 0u32..(1 << m) {
        let shifts: Vec<u64> = (0..m).filter(|j| subset >> j & 1 == 1).map(u64::from).collect();
        let eps_neg = shifts.iter().filter(|&&j| word.letter(j as u32)).count() % 2 == 1;
        let c = if shifts.is_empty() {
            window as i64
        } else {
            signed_product_sum(seq, &shifts, 1, window)
        };
        total += if eps_neg { -i128::from(c) } else { i128::from(c) };
    }
    // total = count * 2^m; the division is exact by construction.
    let den = i128::from(window) << m;
    let r = Ratio::new(total, den);
    if *r.numer() < 0 {
        return Err(Error::PreconditionFailed("negative frequency from correlation expansion".into()));
    }
    Ok(Ratio::new(*r.numer() as u64, *r.denom() as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthDiscrepancy {
    pub length: u32,
    pub window: u64,
    pub worst_word: String,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub n: u64,
    pub per_length: Vec<LengthDiscrepancy>,
    pub overall: f64,
}

pub fn discrepancy_report(set: &SetBitset, max_len: u32, n: u64) -> Result<DiscrepancyReport> {
    let stats = word_frequencies(set, max_len, n)?;
    Ok(discrepancy_of(&stats))
}

pub fn discrepancy_of(stats: &WordStats) -> DiscrepancyReport {
    let mut per_length = Vec::new();
    for len in 1..=stats.max_len() {
        let mut worst: Option<(Ratio<u128>, Word)> = None;
        for code in 0..(1u32 << len) {
            let w = Word { code, len };
            let d = stats.deviation(w);
            if worst.as_ref().is_none_or(|(best, _)| d > *best) {
                worst = Some((d, w));
            }
        }
        let (d, w) = worst.expect("at least one word");
        per_length.push(LengthDiscrepancy {
            length: len,
            window: stats.window(len),
            worst_word: w.to_string(),
            max_deviation: ratio_f64(d),
        });
    }
    let overall = per_length.iter().map(|l| l.max_deviation).fold(0.0, f64::max);
    DiscrepancyReport { n: stats.n(), per_length, overall }
}

fn ratio_f64(r: Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Increasing list of window sizes for trend checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Grid(Vec<u64>);

impl Grid {
    pub fn new(points: Vec<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("grid is empty"));
        }
        if points[0] == 0 || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("grid must be strictly increasing and positive"));
        }
        Ok(Self(points))
    }

    /// `N_i = i^degree` for every `i` with `start <= i^degree <= end`.
    pub fn polynomial(start: u64, end: u64, degree: u32) -> Result<Self> {
        if degree == 0 {
            return Err(invalid("polynomial grid degree must be >= 1"));
        }
        let mut points = Vec::new();
        let mut i = 1u64;
        while let Some(v) = i.checked_pow(degree) {
            if v > end {
                break;
            }
            if v >= start {
                points.push(v);
            }
            i += 1;
        }
        Self::new(points)
    }

    pub fn points(&self) -> &[u64] {
        &self.0
    }
}

impl TryFrom<Vec<u64>> for Grid {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Grid> for Vec<u64> {
    fn from(g: Grid) -> Self {
        g.0
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// `start:end:polyK`, or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| t.trim().parse::<u64>().map_err(|e| invalid(format!("bad grid value {t:?}: {e}")));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, end, kind] => {
                let degree = kind
                    .trim()
                    .strip_prefix("poly")
                    .ok_or_else(|| invalid(format!("unknown grid kind {kind:?}")))?
                    .parse::<u32>()
                    .map_err(|e| invalid(format!("bad grid degree in {kind:?}: {e}")))?;
                Self::polynomial(num(start)?, num(end)?, degree)
            }
            [list] => Self::new(list.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(invalid(format!("cannot parse grid {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendPoint {
    pub n: u64,
    pub sum: i64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub offsets: OffsetSpec,
    pub points: Vec<TrendPoint>,
    /// `N_i / N_{i+1}`.
    pub ratios: Vec<f64>,
    /// max |T| over the first half of the grid.
    pub head_max_abs: f64,
    /// max |T| over the second half of the grid.
    pub tail_max_abs: f64,
    /// Set when the grid has a single point.
    pub undefined: bool,
}

pub fn subsequence_trend(seq: &SignedSequence, spec: &OffsetSpec, grid: &Grid) -> Result<TrendReport> {
    let pts = grid.points();
    let last = *pts.last().expect("grid is non-empty");
    check_range(last + spec.max_offset(), seq.limit())?;
    let shifts = spec.with_zero();

    // Cumulative sums across consecutive grid segments.
    let mut points = Vec::with_capacity(pts.len());
    let mut acc = 0i64;
    let mut prev = 0u64;
    for &n in pts {
        acc += signed_product_sum(seq, &shifts, prev + 1, n - prev);
        prev = n;
        points.push(TrendPoint { n, sum: acc, t: acc as f64 / n as f64 });
    }
    let ratios = pts.windows(2).map(|w| w[0] as f64 / w[1] as f64).collect();
    let half = pts.len() / 2;
    let max_abs = |s: &[TrendPoint]| s.iter().map(|p| p.t.abs()).fold(0.0, f64::max);
    Ok(TrendReport {
        offsets: spec.clone(),
        head_max_abs: max_abs(&points[..half]),
        tail_max_abs: max_abs(&points[half..]),
        undefined: pts.len() < 2,
        points,
        ratios,
    })
}
