//! Acceptance suite. Runs every criterion in order, prints one line each,
//! and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::Ratio;

use liouq::equations::{
    scan_schur, solve_diff_of_squares, solve_sum_of_squares, solve_xy_z2, verify_cnk, verify_magic_triple,
    MagicTriple, Outcome, SolutionReport,
};
use liouq::normality::{discrepancy_report, word_freq_via_correlations, word_frequencies, Word};
use liouq::pair_square::{count_square_pairs, loglog_slope, monte_carlo_e_tn2, per_x_bound_check};
use liouq::run::{execute, Command, Equation, RunConfig};
use liouq::sign::{a_q_set, splitmix64};
use liouq::{nset, OffsetSpec, SetBitset, SignAssignment, SignedSequence, SpfTable};

const SEEDS: [u64; 10] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9];
const OFFSET_SETS: [&[u64]; 4] = [&[], &[1], &[2], &[1, 2]];

struct Check {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn spec(v: &[u64]) -> OffsetSpec {
    OffsetSpec::new(v.to_vec()).unwrap()
}

fn big_xi(x: u64, offs: &[u64]) -> BigUint {
    std::iter::once(0).chain(offs.iter().copied()).map(|i| BigUint::from(x + i)).product()
}

/// Re-substitutes witnesses and checks membership, independent of the solver.
fn recheck(r: &SolutionReport, set: &SetBitset, f: impl Fn(u128, u128) -> Option<u128>, names: (&str, &str)) -> bool {
    let (Some(x), Some(y)) = (r.witness(names.0), r.witness(names.1)) else { return false };
    let root = BigUint::from(f(u128::from(x), u128::from(y)).unwrap_or(0));
    let s = root.sqrt();
    r.verified && s.clone() * s == root && set.contains(x) && set.contains(y)
}

fn c01_magic_triples() -> Check {
    let start = Instant::now();
    let s = MagicTriple::DEFAULT_SUM;
    let d = MagicTriple::DEFAULT_DIFFERENCE;
    let pass = verify_magic_triple(&s) && verify_magic_triple(&d);
    let elapsed = start.elapsed();
    let values = [s.values(), d.values()].concat();
    let expected = [15625u128, 59536, 71289, 10816, 462400, 451584];
    ok(
        pass && values == expected && elapsed < Duration::from_millis(1),
        format!("squares {values:?} in {elapsed:?}"),
    )
}

fn c02_pair_oracle() -> Check {
    let t = SpfTable::build(300).unwrap();
    let r = count_square_pairs(10, &spec(&[]), &t).unwrap();
    let mut pass = r.pair_count == 18 && r.e_tn2() == Ratio::new(18, 100);
    let mut checked = 0;
    for offs in OFFSET_SETS {
        // Brute-force "ξ(x) ξ(y) is a square" for every pair in [1, 200]^2,
        // then count each N by prefix.
        let xs: Vec<BigUint> = (1..=200).map(|x| big_xi(x, offs)).collect();
        let sq: Vec<Vec<bool>> = xs
            .iter()
            .map(|a| {
                xs.iter()
                    .map(|b| {
                        let p = a * b;
                        let r = p.sqrt();
                        &r * &r == p
                    })
                    .collect()
            })
            .collect();
        let mut brute = 0u64;
        for n in 1..=200usize {
            // Add row and column n.
            brute += (0..n).filter(|&j| sq[n - 1][j]).count() as u64;
            brute += (0..n - 1).filter(|&i| sq[i][n - 1]).count() as u64;
            let got = count_square_pairs(n as u64, &spec(offs), &t).unwrap().pair_count;
            pass &= got == brute;
            checked += 1;
        }
    }
    ok(pass, format!("count(10, []) = {} ({}), {checked} (N, offsets) cases vs brute force", r.pair_count, r.e_tn2()))
}

fn c03_counting_bound() -> Check {
    let t = SpfTable::build(2100).unwrap();
    let mut total = 0;
    for n in [100u64, 500, 2000] {
        for offs in OFFSET_SETS {
            total += per_x_bound_check(n, &spec(offs), &t).unwrap().violations.len();
        }
    }
    ok(total == 0, format!("{total} violations over 12 (N, offsets) cases"))
}

fn c04_decay() -> Check {
    let t = SpfTable::build((1 << 14) + 2).unwrap();
    let rows: Vec<(f64, f64)> = [8u32, 10, 12, 14]
        .iter()
        .map(|&e| {
            let r = count_square_pairs(1 << e, &spec(&[1]), &t).unwrap();
            (r.n as f64, r.e_tn2_f64())
        })
        .collect();
    let exact: Vec<Ratio<u128>> = [8u32, 10, 12, 14]
        .iter()
        .map(|&e| count_square_pairs(1 << e, &spec(&[1]), &t).unwrap().e_tn2())
        .collect();
    let decreasing = exact.windows(2).all(|w| w[1] < w[0]);
    let slope = loglog_slope(&rows).unwrap();
    ok(
        decreasing && slope <= -0.05,
        format!("e_tn2 = {:?}, slope {slope:.4}", rows.iter().map(|r| r.1).collect::<Vec<_>>()),
    )
}

fn c05_monte_carlo() -> Check {
    let t = SpfTable::build(300).unwrap();
    let s = spec(&[1]);
    let exact = count_square_pairs(256, &s, &t).unwrap().e_tn2_f64();
    let seeds: Vec<u64> = (0..2000).collect();
    let mc = monte_carlo_e_tn2(256, &s, &seeds, &t).unwrap();
    let dev = (mc.mean - exact).abs();
    ok(
        dev <= 3.0 * mc.stderr,
        format!("mean {:.6}, exact {exact:.6}, |diff| {dev:.6} vs 3·stderr {:.6}", mc.mean, 3.0 * mc.stderr),
    )
}

fn c06_schur(sets: &[SetBitset]) -> Check {
    let found: usize = sets
        .iter()
        .map(|a| scan_schur(a, 1_000_000).unwrap())
        .filter(|r| r.outcome != Outcome::Verified)
        .count();
    ok(found == 0, format!("{found} of {} seeds with a solution of xy = z", sets.len()))
}

fn c07_xyz2(sets: &[SetBitset]) -> Check {
    let mut good = 0;
    for a in sets {
        let r = solve_xy_z2(a, 1_000_000).unwrap();
        let w = |k| r.witness(k).unwrap_or(0);
        let (x, y, z) = (w("x"), w("y"), w("z"));
        let product_ok = BigUint::from(x) * BigUint::from(y) == BigUint::from(z) * BigUint::from(z);
        if r.verified && product_ok && x != y && y != z && x != z && [x, y, z].iter().all(|&v| a.contains(v)) {
            good += 1;
        }
    }
    ok(good == sets.len(), format!("{good}/{} seeds solved", sets.len()))
}

fn c08_squares(t: &SpfTable) -> Check {
    let mut sum_ok = 0;
    let mut diff_ok = 0;
    for &seed in &SEEDS {
        let a = a_q_set(&SignAssignment::random(seed), 100_000, t).unwrap();
        let r = solve_sum_of_squares(&a, 100_000, &MagicTriple::DEFAULT_SUM).unwrap();
        if r.outcome == Outcome::Found && recheck(&r, &a, |x, y| Some(x * x + y * y), ("x", "y")) {
            sum_ok += 1;
        }
        let r = solve_diff_of_squares(&a, 100_000, &MagicTriple::DEFAULT_DIFFERENCE).unwrap();
        if r.outcome == Outcome::Found && recheck(&r, &a, |u, v| (u * u).checked_sub(v * v), ("u", "v")) {
            diff_ok += 1;
        }
    }
    ok(sum_ok >= 9 && diff_ok >= 9, format!("sum {sum_ok}/10, difference {diff_ok}/10"))
}

fn c09_cnk(t: &SpfTable) -> Check {
    let seeds: Vec<u64> = (0..)
        .filter(|&s| SignAssignment::random(s).sign_of_prime(2).unwrap() == -1)
        .take(5)
        .collect();
    let violations = seeds
        .iter()
        .filter(|&&s| !verify_cnk(&SignAssignment::random(s), 2, 2, 100_000, t).unwrap().verified)
        .count();
    ok(violations == 0, format!("seeds {seeds:?}: {violations} with violations"))
}

fn c10_normality(seqs: &[SignedSequence]) -> Check {
    let worst = seqs[..5]
        .iter()
        .map(|s| discrepancy_report(s.negative_set(), 8, 1_000_000).unwrap().overall)
        .fold(0.0, f64::max);
    ok(worst <= 0.01, format!("max deviation {worst:.5} over 5 seeds, |w| <= 8"))
}

fn c11_identity() -> Check {
    let t = SpfTable::build(100_000).unwrap();
    let mut state = 0x5EED_u64;
    let mut next = || {
        state = state.wrapping_add(1);
        splitmix64(state)
    };
    let mut agree = 0;
    for _ in 0..50 {
        let seed = next();
        let len = (next() % 6 + 1) as u32;
        let code = (next() % (1 << len)) as u32;
        let n = next() % (100_000 - 10) + 10;
        let seq = SignedSequence::build(&SignAssignment::random(seed), n, &t).unwrap();
        let word = Word::new(code, len).unwrap();
        let direct = word_frequencies(seq.negative_set(), len, n).unwrap().freq(word);
        if word_freq_via_correlations(&seq, word, n).unwrap() == direct {
            agree += 1;
        }
    }
    ok(agree == 50, format!("{agree}/50 exact rational agreements"))
}

fn c12_determinism() -> Check {
    let t = SpfTable::build(1_000_000).unwrap();
    let mut pass = true;
    for limit in [1u64, 7, 8, 9, 64, 1_000_000] {
        let set = a_q_set(&SignAssignment::random(limit), limit.max(2), &t).unwrap();
        let set = if limit == 1 { SetBitset::from_predicate(1, |n| set.contains(n)) } else { set };
        let bytes = nset::encode(&set);
        let back = nset::decode(&bytes).unwrap();
        pass &= back == set && nset::encode(&back) == bytes && bytes.len() as u64 == 13 + limit.div_ceil(8);
    }
    let roundtrip_ok = pass;

    let mut configs = Vec::new();
    let mut c = RunConfig::new(Command::Stats, 200_000);
    c.seed = 3;
    configs.push(c);
    let mut c = RunConfig::new(Command::Correlation, 5_000);
    c.offsets = spec(&[1, 2]);
    c.grid = Some("1000:250000:poly2".parse().unwrap());
    configs.push(c);
    let mut c = RunConfig::new(Command::Pairsquare, 4_096);
    c.offsets = spec(&[1]);
    c.seeds = Some("0..64".parse().unwrap());
    configs.push(c);
    let mut c = RunConfig::new(Command::Solve, 100_000);
    c.equation = Some(Equation::Xyz2);
    c.seed = 11;
    configs.push(c);
    let mut c = RunConfig::new(Command::Generate, 100_000);
    c.seed = 0xABCD;
    configs.push(c);
    let mut replay_ok = true;
    for c in configs {
        let text = serde_json::to_string(&c).unwrap();
        let mut one: RunConfig = serde_json::from_str(&text).unwrap();
        let mut eight = one.clone();
        one.threads = Some(1);
        eight.threads = Some(8);
        let a = execute(&one).unwrap();
        let b = execute(&eight).unwrap();
        replay_ok &= a.report_json() == b.report_json() && a.csv == b.csv && a.nset == b.nset;
    }
    ok(roundtrip_ok && replay_ok, format!("NSET round-trip {roundtrip_ok}, threads 1 vs 8 replay {replay_ok}"))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, &str, Check, Duration, Duration)> = Vec::new();
    let mut run = |id: &'static str, name: &'static str, budget: Duration, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let line_pass = o.pass && elapsed <= budget;
        println!(
            "[{}] {id} {name}: {} ({:.2?}, budget {:?})",
            if line_pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed,
            budget
        );
        results.push((id, name, Check { pass: line_pass, detail: o.detail }, elapsed, budget));
    };

    let secs = Duration::from_secs;
    run("AC-01", "magic-triple identities", Duration::from_millis(1), &mut c01_magic_triples);
    run("AC-02", "pair-count oracle", secs(10), &mut c02_pair_oracle);
    run("AC-03", "counting bound", secs(30), &mut c03_counting_bound);
    run("AC-04", "decay direction", secs(120), &mut c04_decay);
    run("AC-05", "monte-carlo consistency", secs(120), &mut c05_monte_carlo);

    let t = SpfTable::build(1_000_000).unwrap();
    let seqs: Vec<SignedSequence> = SEEDS
        .iter()
        .map(|&s| SignedSequence::build(&SignAssignment::random(s), 1_000_000, &t).unwrap())
        .collect();
    let sets: Vec<SetBitset> = seqs.iter().map(|s| s.negative_set().clone()).collect();

    run("AC-06", "multiplicative schur unsolvable", secs(30), &mut || c06_schur(&sets));
    run("AC-07", "xy = z^2 solved", secs(10), &mut || c07_xyz2(&sets));
    run("AC-08", "sum/difference of squares solved", secs(30), &mut || c08_squares(&t));
    run("AC-09", "xy = 2 n^2 unsolvable", secs(30), &mut || c09_cnk(&t));
    run("AC-10", "finite-scale normality", secs(60), &mut || c10_normality(&seqs));
    run("AC-11", "frequency/correlation identity", secs(60), &mut c11_identity);
    run("AC-12", "determinism and formats", secs(120), &mut c12_determinism);

    let failed: Vec<&str> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
