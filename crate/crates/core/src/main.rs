use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use liouq::normality::Grid;
use liouq::run::{execute, Command, Equation, RunConfig, RunOutput, SeedList, EXIT_ERROR};
use liouq::sign::{parse_seed, SignMode};
use liouq::{OffsetSpec, Result};

/// Random Liouville functions and equations in normal sets.
///
/// Exit codes: 0 verified or found, 1 error, 2 usage error,
/// 3 violation found, 4 not found.
#[derive(Parser, Debug)]
#[command(name = "liouq", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Materialize A_Q on [1, limit] as an NSET file.
    Generate(Common),
    /// Word frequencies and discrepancy of A_Q or an NSET file.
    Stats(Common),
    /// Correlation sum T_N, optionally along a grid of N.
    Correlation(Common),
    /// Exact square-pair counts, E(T_N^2), bound checks, Monte Carlo.
    Pairsquare(Common),
    /// Solve or refute an equation inside A_Q or an NSET file.
    Solve(Common),
    /// List magic triples up to the limit.
    Triples(Common),
    /// Re-run a saved config.
    Replay {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Random,
    Classic,
}

#[derive(Args, Debug)]
struct Common {
    /// Decimal or 0x-hex 64-bit seed.
    #[arg(long, default_value = "0", value_parser = parse_seed_arg)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    mode: ModeArg,
    /// N: the range [1, N] scanned.
    #[arg(long)]
    limit: u64,
    /// Strictly increasing offsets, e.g. 1,2,5.
    #[arg(long, default_value = "", value_parser = parse_offsets)]
    offsets: OffsetSpec,
    #[arg(long, default_value_t = 8)]
    max_word_len: u32,
    /// start:end:polyK or a comma list.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// Monte Carlo seeds, a..b or a comma list.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedList>,
    #[arg(long, value_parser = parse_equation)]
    equation: Option<Equation>,
    #[arg(long)]
    c: Option<u64>,
    #[arg(long)]
    k: Option<u32>,
    /// Magic triple a,b,c.
    #[arg(long)]
    triple: Option<String>,
    /// NSET input instead of a seeded A_Q.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report path (NSET path for generate). Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV table path for correlation trends and decay tables.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the run config as JSON.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

fn parse_seed_arg(s: &str) -> std::result::Result<u64, String> {
    parse_seed(s).map_err(|e| e.to_string())
}

fn parse_offsets(s: &str) -> std::result::Result<OffsetSpec, String> {
    s.parse().map_err(|e: liouq::Error| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    s.parse().map_err(|e: liouq::Error| e.to_string())
}

fn parse_seeds(s: &str) -> std::result::Result<SeedList, String> {
    s.parse().map_err(|e: liouq::Error| e.to_string())
}

fn parse_equation(s: &str) -> std::result::Result<Equation, String> {
    s.parse().map_err(|e: liouq::Error| e.to_string())
}

impl Common {
    fn into_config(self, command: Command) -> (RunConfig, Option<PathBuf>) {
        let config = RunConfig {
            command,
            mode: match self.mode {
                ModeArg::Random => SignMode::Random,
                ModeArg::Classic => SignMode::Classic,
            },
            seed: self.seed,
            seeds: self.seeds,
            limit: self.limit,
            offsets: self.offsets,
            max_word_len: self.max_word_len,
            grid: self.grid,
            equation: self.equation,
            c: self.c,
            k: self.k,
            triple: self.triple,
            input: self.input,
            out: self.out,
            csv: self.csv,
            threads: self.threads,
        };
        (config, self.save_config)
    }
}

fn emit(config: &RunConfig, output: &RunOutput) -> Result<()> {
    let json = output.report_json();
    match (&output.nset, &config.out) {
        (Some(bytes), Some(path)) => {
            fs::write(path, bytes)?;
            print!("{json}");
        }
        (None, Some(path)) => fs::write(path, &json)?,
        (_, None) => print!("{json}"),
    }
    if let (Some(csv), Some(path)) = (&output.csv, &config.csv) {
        fs::write(path, csv)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let (config, save) = match cli.command {
        Cmd::Generate(c) => c.into_config(Command::Generate),
        Cmd::Stats(c) => c.into_config(Command::Stats),
        Cmd::Correlation(c) => c.into_config(Command::Correlation),
        Cmd::Pairsquare(c) => c.into_config(Command::Pairsquare),
        Cmd::Solve(c) => c.into_config(Command::Solve),
        Cmd::Triples(c) => c.into_config(Command::Triples),
        Cmd::Replay { config, threads, out, csv } => {
            let mut cfg: RunConfig = serde_json::from_slice(&fs::read(config)?)?;
            cfg.threads = threads.or(cfg.threads);
            cfg.out = out.or(cfg.out);
            cfg.csv = csv.or(cfg.csv);
            (cfg, None)
        }
    };
    if let Some(path) = save {
        fs::write(path, serde_json::to_string_pretty(&config)? + "\n")?;
    }
    let output = execute(&config)?;
    emit(&config, &output)?;
    Ok(output.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
