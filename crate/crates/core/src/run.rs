//! Serializable run configurations and their execution.
//!
//! A [`RunConfig`] fully determines the bytes a command emits. Thread count
//! only sizes the worker pool and is left out of the embedded config, so
//! replays at any thread count produce identical reports.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bitset::SetBitset;
use crate::equations::{
    find_magic_triples, scan_schur, solve_diff_of_squares, solve_sum_of_squares, solve_xy_z2,
    verify_cnk, MagicTriple, Outcome, SolutionReport, TripleKind,
};
use crate::error::{invalid, Error, Result};
use crate::normality::{correlation_sum, discrepancy_of, subsequence_trend, word_frequencies, Grid, Word};
use crate::nset;
use crate::pair_square::{count_square_pairs, decay_table, monte_carlo_e_tn2, per_x_bound_check, sum_2h};
use crate::sieve::{OffsetSpec, SpfTable};
use crate::sign::{parse_seed, SignAssignment, SignMode, SignedSequence};

pub const REPORT_VERSION: u32 = 1;

/// Word-count rows are emitted up to this length; discrepancy covers all lengths.
pub const MAX_ROW_LEN: u32 = 12;

/// Exit code for argument, I/O and format errors.
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Generate,
    Stats,
    Correlation,
    Pairsquare,
    Solve,
    Triples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    Schur,
    Cnk,
    Xyz2,
    Sumsq,
    Diffsq,
}

impl FromStr for Equation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schur" => Ok(Self::Schur),
            "cnk" => Ok(Self::Cnk),
            "xyz2" => Ok(Self::Xyz2),
            "sumsq" => Ok(Self::Sumsq),
            "diffsq" => Ok(Self::Diffsq),
            _ => Err(invalid(format!("unknown equation {s:?} (schur, cnk, xyz2, sumsq, diffsq)"))),
        }
    }
}

/// Seeds given as `a..b` (half-open) or a comma list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SeedList {
    text: String,
    seeds: Vec<u64>,
}

impl SeedList {
    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }
}

impl FromStr for SeedList {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let seeds = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (parse_seed(a)?, parse_seed(b)?);
            if a >= b {
                return Err(invalid(format!("empty seed range {s:?}")));
            }
            (a..b).collect()
        } else {
            s.split(',').map(parse_seed).collect::<Result<Vec<_>>>()?
        };
        Ok(Self { text: s.to_string(), seeds })
    }
}

impl TryFrom<String> for SeedList {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SeedList> for String {
    fn from(s: SeedList) -> String {
        s.text
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub mode: SignMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedList>,
    pub limit: u64,
    #[serde(default)]
    pub offsets: OffsetSpec,
    #[serde(default = "default_word_len")]
    pub max_word_len: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equation: Option<Equation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn default_word_len() -> u32 {
    8
}

impl RunConfig {
    pub fn new(command: Command, limit: u64) -> Self {
        Self {
            command,
            mode: SignMode::Random,
            seed: 0,
            seeds: None,
            limit,
            offsets: OffsetSpec::empty(),
            max_word_len: default_word_len(),
            grid: None,
            equation: None,
            c: None,
            k: None,
            triple: None,
            input: None,
            out: None,
            csv: None,
            threads: None,
        }
    }

    fn assignment(&self) -> SignAssignment {
        SignAssignment { seed: self.seed, mode: self.mode }
    }

    fn seed_field(&self) -> Value {
        match self.mode {
            SignMode::Random => json!(self.seed),
            SignMode::Classic => Value::Null,
        }
    }

    /// The config as embedded in reports: execution-only fields removed.
    fn embedded(&self) -> Value {
        let mut c = self.clone();
        c.threads = None;
        c.out = None;
        c.csv = None;
        serde_json::to_value(c).expect("config serializes")
    }
}

/// Everything a run produces, before anything touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Value,
    pub csv: Option<String>,
    pub nset: Option<Vec<u8>>,
    pub exit_code: i32,
}

impl RunOutput {
    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Rounds to 12 decimals so float fields render identically everywhere.
pub fn fixed(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e12).round() / 1e12
    } else {
        x
    }
}

pub fn execute(config: &RunConfig) -> Result<RunOutput> {
    let threads = config.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(config))
}

fn dispatch(config: &RunConfig) -> Result<RunOutput> {
    if config.limit == 0 {
        return Err(invalid("limit must be >= 1"));
    }
    let mut out = match config.command {
        Command::Generate => run_generate(config),
        Command::Stats => run_stats(config),
        Command::Correlation => run_correlation(config),
        Command::Pairsquare => run_pairsquare(config),
        Command::Solve => run_solve(config),
        Command::Triples => run_triples(config),
    }?;
    if let Value::Object(map) = &mut out.report {
        map.insert("report_version".into(), json!(REPORT_VERSION));
        map.insert("config".into(), config.embedded());
    }
    Ok(out)
}

fn table_for(limit: u64) -> Result<SpfTable> {
    SpfTable::build(limit.max(2))
}

fn a_q(config: &RunConfig, limit: u64) -> Result<SetBitset> {
    let table = table_for(limit)?;
    Ok(SignedSequence::build(&config.assignment(), limit, &table)?.into_negative_set())
}

/// The input set: an NSET file when given, otherwise `A_Q` on `[1, limit]`.
fn source_set(config: &RunConfig) -> Result<SetBitset> {
    match &config.input {
        Some(path) => nset::read_file(path),
        None => a_q(config, config.limit),
    }
}

fn run_generate(config: &RunConfig) -> Result<RunOutput> {
    let set = a_q(config, config.limit)?;
    let first: Vec<u64> = set.iter().take(20).collect();
    let report = json!({
        "command": "generate",
        "seed": config.seed_field(),
        "mode": config.mode,
        "limit": set.limit(),
        "members": set.len(),
        "density": fixed(set.density()),
        "first_members": first,
    });
    Ok(RunOutput { report, csv: None, nset: Some(nset::encode(&set)), exit_code: 0 })
}

fn run_stats(config: &RunConfig) -> Result<RunOutput> {
    let set = source_set(config)?;
    let n = config.limit.min(set.limit());
    let stats = word_frequencies(&set, config.max_word_len, n)?;
    let mut rows = Vec::new();
    for len in 1..=config.max_word_len.min(MAX_ROW_LEN) {
        let window = stats.window(len);
        for code in 0..(1u32 << len) {
            let w = Word::new(code, len)?;
            let f = stats.freq(w);
            let d = stats.deviation(w);
            rows.push(json!({
                "word": w.to_string(),
                "length": len,
                "count": stats.count(w),
                "window": window,
                "freq_num": f.numer(),
                "freq_den": f.denom(),
                "deviation": fixed(*d.numer() as f64 / *d.denom() as f64),
            }));
        }
    }
    let disc = discrepancy_of(&stats);
    let per_length: Vec<Value> = disc
        .per_length
        .iter()
        .map(|l| {
            json!({
                "length": l.length,
                "window": l.window,
                "worst_word": l.worst_word,
                "max_deviation": fixed(l.max_deviation),
            })
        })
        .collect();
    let report = json!({
        "command": "stats",
        "seed": if config.input.is_some() { Value::Null } else { config.seed_field() },
        "n": n,
        "max_word_len": config.max_word_len,
        "window_convention": "positions 1..=N-len+1",
        "words": rows,
        "discrepancy": { "per_length": per_length, "overall": fixed(disc.overall) },
    });
    Ok(RunOutput { report, csv: None, nset: None, exit_code: 0 })
}

fn run_correlation(config: &RunConfig) -> Result<RunOutput> {
    let n = config.limit;
    let top = config.grid.as_ref().map_or(n, |g| n.max(*g.points().last().expect("non-empty")));
    let seq_limit = top + config.offsets.max_offset();
    let table = table_for(seq_limit)?;
    let seq = SignedSequence::build(&config.assignment(), seq_limit, &table)?;
    let r = correlation_sum(&seq, &config.offsets, n)?;
    let v = r.value();
    let mut report = json!({
        "command": "correlation",
        "seed": config.seed_field(),
        "n": n,
        "offsets": config.offsets,
        "sum": r.sum,
        "t_num": v.numer(),
        "t_den": v.denom(),
        "t": fixed(r.as_f64()),
    });
    let mut csv = None;
    if let Some(grid) = &config.grid {
        let trend = subsequence_trend(&seq, &config.offsets, grid)?;
        let mut text = String::from("n,sum,t\n");
        for p in &trend.points {
            text.push_str(&format!("{},{},{:.12}\n", p.n, p.sum, p.t));
        }
        report["trend"] = json!({
            "points": trend.points.len(),
            "first_n": trend.points.first().map(|p| p.n),
            "last_n": trend.points.last().map(|p| p.n),
            "last_ratio": trend.ratios.last().map(|&r| fixed(r)),
            "head_max_abs": fixed(trend.head_max_abs),
            "tail_max_abs": fixed(trend.tail_max_abs),
            "undefined": trend.undefined,
        });
        csv = Some(text);
    }
    Ok(RunOutput { report, csv, nset: None, exit_code: 0 })
}

fn dyadic_grid(n: u64) -> Vec<u64> {
    let mut v: Vec<u64> = std::iter::successors(Some(16u64), |&x| x.checked_mul(2))
        .take_while(|&x| x < n)
        .collect();
    v.push(n);
    v
}

fn run_pairsquare(config: &RunConfig) -> Result<RunOutput> {
    let n = config.limit;
    let spec = &config.offsets;
    let table = table_for(n + spec.max_offset())?;
    let pairs = count_square_pairs(n, spec, &table)?;
    let bound = per_x_bound_check(n, spec, &table)?;
    let s2h = sum_2h(n, spec, &table)?;
    let (rows, slope) = decay_table(&dyadic_grid(n), spec, &table)?;
    let e = pairs.e_tn2();
    let mut report = json!({
        "command": "pairsquare",
        "N": n,
        "offsets": spec,
        "pair_count": pairs.pair_count,
        "e_tn2_num": e.numer().to_string(),
        "e_tn2_den": e.denom().to_string(),
        "e_tn2": fixed(pairs.e_tn2_f64()),
        "r": bound.r,
        "bound_violations": bound.violations,
        "smallest_p": s2h.smallest_p,
        "smallest_p_index": s2h.smallest_p_index,
        "sum_2h": s2h.sum.to_string(),
        "sum_2h_fitted_exponent": s2h.fitted_exponent.map(fixed),
        "sum_2h_exponent_bound": s2h.exponent_bound,
        "decay_slope": slope.map(fixed),
    });
    if let Some(seeds) = &config.seeds {
        let mc = monte_carlo_e_tn2(n, spec, seeds.seeds(), &table)?;
        let exact = pairs.e_tn2_f64();
        report["monte_carlo"] = json!({
            "seeds": seeds.seeds().len(),
            "mean": fixed(mc.mean),
            "stderr": fixed(mc.stderr),
            "exact": fixed(exact),
            "within_3_stderr": (mc.mean - exact).abs() <= 3.0 * mc.stderr,
        });
    }
    let mut csv = String::from("N,pair_count,e_tn2\n");
    for r in rows {
        csv.push_str(&format!("{},{},{:.12}\n", r.n, r.pair_count, r.e_tn2));
    }
    let exit_code = if bound.violations.is_empty() { 0 } else { Outcome::Violation.exit_code() };
    Ok(RunOutput { report, csv: Some(csv), nset: None, exit_code })
}

fn triple_or_default(config: &RunConfig, kind: TripleKind) -> Result<MagicTriple> {
    match &config.triple {
        Some(t) => MagicTriple::parse(t, kind),
        None => Ok(match kind {
            TripleKind::Sum => MagicTriple::DEFAULT_SUM,
            TripleKind::Difference => MagicTriple::DEFAULT_DIFFERENCE,
        }),
    }
}

fn run_solve(config: &RunConfig) -> Result<RunOutput> {
    let equation = config.equation.ok_or_else(|| invalid("solve needs an equation"))?;
    let n = config.limit;
    let seeded = config.input.is_none();
    let mut report: SolutionReport = match equation {
        Equation::Schur => scan_schur(&source_set(config)?, n)?,
        Equation::Cnk => {
            if !seeded {
                return Err(invalid("cnk needs a seeded A_Q, not an input file"));
            }
            let table = table_for(n)?;
            verify_cnk(&config.assignment(), config.c.unwrap_or(2), config.k.unwrap_or(2), n, &table)?
        }
        Equation::Xyz2 => solve_xy_z2(&source_set(config)?, n)?,
        Equation::Sumsq => solve_sum_of_squares(&source_set(config)?, n, &triple_or_default(config, TripleKind::Sum)?)?,
        Equation::Diffsq => {
            solve_diff_of_squares(&source_set(config)?, n, &triple_or_default(config, TripleKind::Difference)?)?
        }
    };
    report.seed = if seeded && config.mode == SignMode::Random { Some(config.seed) } else { None };
    let exit_code = report.outcome.exit_code();
    Ok(RunOutput { report: serde_json::to_value(&report)?, csv: None, nset: None, exit_code })
}

fn run_triples(config: &RunConfig) -> Result<RunOutput> {
    let mut all = Vec::new();
    for kind in [TripleKind::Sum, TripleKind::Difference] {
        for t in find_magic_triples(config.limit, kind) {
            all.push(json!({ "kind": t.kind, "a": t.a, "b": t.b, "c": t.c, "values": t.values().map(|v| v.to_string()) }));
        }
    }
    let report = json!({ "command": "triples", "limit": config.limit, "triples": all });
    Ok(RunOutput { report, csv: None, nset: None, exit_code: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        let s: SeedList = "0..5".parse().unwrap();
        assert_eq!(s.seeds(), &[0, 1, 2, 3, 4]);
        let s: SeedList = "1,0x10".parse().unwrap();
        assert_eq!(s.seeds(), &[1, 16]);
        assert!("5..5".parse::<SeedList>().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut c = RunConfig::new(Command::Pairsquare, 100);
        c.offsets = OffsetSpec::new(vec![1, 2]).unwrap();
        c.seeds = Some("0..3".parse().unwrap());
        c.grid = Some("10,20".parse().unwrap());
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<RunConfig>(r#"{"command":"stats","limit":10,"offsets":[3,1]}"#).is_err());
    }

    #[test]
    fn dyadic_grid_ends_at_n() {
        assert_eq!(dyadic_grid(100), vec![16, 32, 64, 100]);
        assert_eq!(dyadic_grid(10), vec![10]);
    }
}
