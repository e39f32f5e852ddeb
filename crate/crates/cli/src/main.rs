use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bintab::asymptotics::delta_result;
use bintab::experiments::{
    count_report, csv_string, empirical_constants, figure1, run_convergence, run_sweep,
    ConvergenceConfig, CsvRecord, Figure1Config, Sidecar, SweepConfig, SweepSummary,
};
use bintab::independence::log_heuristic_exact;
use bintab::{
    build_family_margins, log_heuristic, solve_typical_table, DpOptions, FamilyParams, MarginPair,
    SolverOptions,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "bintab",
    version,
    about = "Binary contingency table experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Common {
    /// Write the result here (plus a `.meta.json` sidecar) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Margin residual tolerance of the typical-table solver.
    #[arg(long, default_value_t = 1e-10, global = true)]
    tol: f64,
    /// Constant of the entropy lower bound.
    #[arg(long, default_value_t = 1.0, global = true)]
    gamma: f64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact count, entropy bound, independence estimate and their ratio.
    Count {
        #[command(flatten)]
        margins: MarginArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Maximum number of DP states per column.
        #[arg(long, default_value_t = DpOptions::default().state_cap)]
        state_cap: usize,
    },
    /// Maximum-entropy typical table (CSV: one line per block).
    Typical {
        #[command(flatten)]
        margins: MarginArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Solve every row and column separately instead of by margin class.
        #[arg(long)]
        generic: bool,
    },
    /// Independence estimate `ln I(r, c)`.
    Heuristic {
        #[command(flatten)]
        margins: MarginArgs,
        /// Use exact big-integer binomials instead of log-gamma.
        #[arg(long)]
        exact: bool,
    },
    /// Limit `Δ` at one `(B, C)` with its bounds and identity residual.
    Delta {
        #[arg(long = "B")]
        b: f64,
        #[arg(long = "C")]
        c: f64,
    },
    /// `Δ` against `B` for several `C`.
    Figure1 {
        #[arg(long = "C", value_delimiter = ',', default_values_t = [0.5, 0.25, 0.625, 0.125])]
        c: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Typical tables of the family for growing `n` against their limits.
    Convergence {
        #[arg(long = "B", default_value_t = 0.5)]
        b: f64,
        #[arg(long = "C", default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200, 400])]
        ns: Vec<u32>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        generic: bool,
    },
    /// `Δ`, bounds and identity residual over a `(B, C)` grid.
    Sweep {
        /// Explicit `C` values; default is a uniform grid of `--c-steps` points.
        #[arg(long = "C", value_delimiter = ',')]
        c: Option<Vec<f64>>,
        /// Explicit `B` values used for every `C`.
        #[arg(long = "B", value_delimiter = ',')]
        b: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100)]
        c_steps: usize,
        #[arg(long, default_value_t = 100)]
        b_steps: usize,
    },
}

#[derive(Args, Debug, Serialize)]
struct MarginArgs {
    #[arg(long, value_delimiter = ',', requires = "cols")]
    rows: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', requires = "rows")]
    cols: Option<Vec<u32>>,
    /// JSON file `{"rows": [...], "cols": [...]}`.
    #[arg(long, conflicts_with_all = ["rows", "cols", "n"])]
    margins_file: Option<PathBuf>,
    /// Family instance: `⌊n^δ⌋` lines of sum `⌊BCn⌋`, `n` lines of sum `⌊Cn⌋`.
    #[arg(long, conflicts_with_all = ["rows", "cols"], requires_all = ["b", "c"])]
    n: Option<u32>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    b: Option<f64>,
    #[arg(long = "C")]
    #[serde(rename = "C")]
    c: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SolverArgs {
    #[arg(long, default_value_t = SolverOptions::default().max_iterations)]
    max_iter: usize,
    /// Wall-clock limit per solve, in seconds.
    #[arg(long, default_value_t = 60.0)]
    time_budget: f64,
}

impl SolverArgs {
    fn options(&self, tol: f64, collapse: bool) -> Result<SolverOptions, Failure> {
        if !(tol > 0.0) || !(self.time_budget > 0.0) {
            return Err(Failure::usage("--tol and --time-budget must be positive"));
        }
        Ok(SolverOptions {
            tolerance: tol,
            max_iterations: self.max_iter,
            collapse,
            time_budget: Some(std::time::Duration::from_secs_f64(self.time_budget)),
        })
    }
}

/// Margin vectors as given, before the line-sum bounds are checked.
#[derive(serde::Deserialize)]
struct RawMargins {
    rows: Vec<u32>,
    cols: Vec<u32>,
}

impl MarginArgs {
    fn resolve_raw(&self) -> Result<RawMargins, Failure> {
        if let (Some(rows), Some(cols)) = (&self.rows, &self.cols) {
            return Ok(RawMargins {
                rows: rows.clone(),
                cols: cols.clone(),
            });
        }
        if let Some(path) = &self.margins_file {
            let file =
                File::open(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            return serde_json::from_reader(file)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())));
        }
        match (self.n, self.b, self.c) {
            (Some(n), Some(b), Some(c)) => {
                let pair = build_family_margins(&FamilyParams::new(n, self.delta, b, c)?)?;
                Ok(RawMargins {
                    rows: pair.rows().to_vec(),
                    cols: pair.cols().to_vec(),
                })
            }
            _ => Err(Failure::usage(
                "give --rows and --cols, --margins-file, or --n with --B and --C",
            )),
        }
    }

    fn resolve(&self) -> Result<MarginPair, Failure> {
        let raw = self.resolve_raw()?;
        Ok(MarginPair::new(raw.rows, raw.cols)?)
    }
}

/// Message plus process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<bintab::Error> for Failure {
    fn from(e: bintab::Error) -> Self {
        use bintab::Error::*;
        let code = match e {
            Domain(_) | InvalidMargins(_) | Infeasible | NoInterior => 2,
            NonConvergence { .. } | Timeout { .. } => 3,
            SizeLimit { .. } | StateSpaceCap { .. } => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}

/// A finished computation, ready to be written.
struct Output {
    csv: String,
    json: Value,
    rows: usize,
    summary: Option<Value>,
}

impl Output {
    fn rows<R: CsvRecord + Serialize>(rows: &[R]) -> Self {
        Self {
            csv: csv_string(rows),
            json: serde_json::to_value(rows).expect("rows serialize"),
            rows: rows.len(),
            summary: None,
        }
    }

    fn single<R: CsvRecord + Serialize>(record: R) -> Self {
        let json = serde_json::to_value(&record).expect("record serializes");
        Self {
            json,
            ..Self::rows(&[record])
        }
    }

    fn summary(mut self, summary: Value) -> Self {
        self.summary = Some(summary);
        self
    }
}

fn emit(common: &Common, command: &str, config: Value, output: Output) -> Result<(), Failure> {
    let text = match common.format {
        Format::Csv => output.csv,
        Format::Json => serde_json::to_string_pretty(&output.json).expect("json") + "\n",
    };
    match &common.out {
        None => print!("{text}"),
        Some(path) => {
            std::fs::write(path, text)?;
            let config = json!({ "common": common, "args": config });
            let mut sidecar = Sidecar::new(command, config, path, output.rows);
            if let Some(summary) = output.summary {
                sidecar = sidecar.with_summary(summary);
            }
            sidecar.write(Path::new(path))?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("config serializes")
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }

    match &cli.command {
        Command::Count {
            margins,
            solver,
            state_cap,
        } => {
            let raw = margins.resolve_raw()?;
            let report = count_report(
                &raw.rows,
                &raw.cols,
                common.gamma,
                &DpOptions {
                    state_cap: *state_cap,
                },
                &solver.options(common.tol, true)?,
            )?;
            let feasible = report.feasible;
            let config = json!({ "margins": to_json(margins), "solver": to_json(solver), "state_cap": state_cap });
            emit(common, "count", config, Output::single(report))?;
            if !feasible {
                return Err(bintab::Error::Infeasible.into());
            }
        }
        Command::Typical {
            margins,
            solver,
            generic,
        } => {
            let pair = margins.resolve()?;
            let table = solve_typical_table(&pair, &solver.options(common.tol, !generic)?)?;
            eprintln!(
                "g(Z) = {:.15e}, residual = {:.3e}, sweeps = {}",
                table.entropy_value, table.residual, table.iterations
            );
            let blocks = table.blocks();
            let out = Output {
                json: to_json(&table.report()),
                ..Output::rows(&blocks)
            };
            let config = json!({ "margins": to_json(margins), "solver": to_json(solver), "generic": generic });
            emit(common, "typical", config, out)?;
        }
        Command::Heuristic { margins, exact } => {
            let pair = margins.resolve()?;
            let mut result = log_heuristic(&pair);
            if *exact {
                result.log_estimate = log_heuristic_exact(&pair);
            }
            let config = json!({ "margins": to_json(margins), "exact": exact });
            emit(common, "heuristic", config, Output::single(result))?;
        }
        Command::Delta { b, c } => {
            delta_result(*b, *c)?;
            let rows = run_sweep(&SweepConfig {
                c_values: vec![*c],
                b_steps: 0,
                b_values: Some(vec![*b]),
            })?;
            emit(
                common,
                "delta",
                json!({ "B": b, "C": c }),
                Output::single(rows[0].clone()),
            )?;
        }
        Command::Figure1 { c, resolution } => {
            let config = Figure1Config {
                c_values: c.clone(),
                resolution: *resolution,
            };
            let rows = figure1(&config)?;
            emit(common, "figure1", to_json(&config), Output::rows(&rows))?;
        }
        Command::Convergence {
            b,
            c,
            delta,
            ns,
            solver,
            generic,
        } => {
            solver.options(common.tol, !generic)?;
            let config = ConvergenceConfig {
                b: *b,
                c: *c,
                delta: *delta,
                ns: ns.clone(),
                tolerance: common.tol,
                max_iterations: solver.max_iter,
                generic: *generic,
                time_budget_secs: solver.time_budget,
            };
            let rows = run_convergence(&config)?;
            let constants = empirical_constants(&config, &rows)?;
            let failed: Vec<&str> = rows
                .iter()
                .filter(|r| !r.is_ok())
                .map(|r| r.status.as_str())
                .collect();
            eprintln!(
                "empirical constants: corner {:.6e}, edge {:.6e}, bulk {:.6e}",
                constants.corner, constants.edge, constants.bulk
            );
            let out = Output::rows(&rows).summary(to_json(&constants));
            emit(common, "convergence", to_json(&config), out)?;
            if let Some(first) = failed.first() {
                return Err(Failure {
                    code: 3,
                    message: format!("{} of {} solves failed: {first}", failed.len(), rows.len()),
                });
            }
        }
        Command::Sweep {
            c,
            b,
            c_steps,
            b_steps,
        } => {
            let mut config = match c {
                Some(cs) => SweepConfig {
                    c_values: cs.clone(),
                    b_steps: *b_steps,
                    b_values: None,
                },
                None => SweepConfig::uniform(*c_steps, *b_steps),
            };
            config.b_values = b.clone();
            let rows = run_sweep(&config)?;
            let summary = SweepSummary::of(&rows);
            eprintln!(
                "summary: points {}, skipped {}, max identity residual {:.3e}, lower violations {}, upper violations {}",
                summary.points,
                summary.skipped,
                summary.max_identity_residual,
                summary.lower_violations,
                summary.upper_violations
            );
            let out = Output::rows(&rows).summary(to_json(&summary));
            emit(common, "sweep", to_json(&config), out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
