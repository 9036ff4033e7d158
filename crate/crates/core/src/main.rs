use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use metachain::alg1::{run_algorithm1_with, Alg1Options, TieBreak};
use metachain::alg2::run_algorithm2;
use metachain::analysis::validate;
use metachain::compare::compare_reports;
use metachain::dot::{alg1_tgraph_dot, alg2_tgraph_dot, graph_to_dot};
use metachain::io::{parse_graph, Format};
use metachain::kinesin::{kinesin_sweep, parse_grid, KinesinParams};
use metachain::kmc::{census_runs, census_vs_tgraph, Simulator};
use metachain::oracle::run_oracle;
use metachain::report::{self, SCHEMA};
use metachain::spectral::{eigenvalue_estimates, eigenvalue_estimates_with_numerics};
use metachain::stop::{StopCriterion, StopSpec};
use metachain::wgraph::{enumerate_optimal, extract_wgraph, DEFAULT_ORACLE_CAP};
use metachain::ChainGraph;

#[derive(Parser)]
#[command(
    name = "metachain",
    version,
    about = "Timescale hierarchies and optimal W-graphs of metastable Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
}

#[derive(Args)]
struct InputArgs {
    /// Chain graph file.
    #[arg(long)]
    input: String,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
}

#[derive(Args)]
struct SweepArgs {
    /// bucket-empty, bucket-size-one, exponent:<U> or cover:<a,b>/<c,d>.
    #[arg(long, default_value = "bucket-empty", value_parser = parse_stop)]
    stop: StopSpec,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreakArg {
    Lex,
    ReverseLex,
}

impl From<TieBreakArg> for TieBreak {
    fn from(t: TieBreakArg) -> TieBreak {
        match t {
            TieBreakArg::Lex => TieBreak::Lexicographic,
            TieBreakArg::ReverseLex => TieBreak::ReverseLexicographic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Alg1,
    Alg2,
}

#[derive(Subcommand)]
enum Command {
    /// Communicating classes and the single-closed-class condition.
    Validate(InputArgs),
    /// Single-arc sweep: exponents, cycles, T-graphs.
    Alg1 {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value = "lex")]
        tie_break: TieBreakArg,
    },
    /// Min-arc-set sweep: distinct exponents, closed classes, T-graphs.
    Alg2 {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Optimal W-graphs extracted from the single-arc sweep.
    Wgraphs {
        #[command(flatten)]
        input: InputArgs,
        /// Cross-check every extraction against brute-force enumeration.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: usize,
    },
    /// Asymptotic eigenvalue estimates.
    Eigs {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "epsilon", default_values_t = [0.1])]
        epsilon: Vec<f64>,
        /// Also compute the eigenvalues numerically.
        #[arg(long)]
        oracle: bool,
    },
    /// Enumeration, characteristic-polynomial identity and spectral convergence.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "epsilon", default_values_t = [1.0, 0.3])]
        epsilon: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: usize,
    },
    /// Checks that both sweeps agree on exponents, T-graphs and classes.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "lex")]
        tie_break: TieBreakArg,
    },
    /// Kinetic Monte Carlo census of observed jumps against a T-graph.
    Kmc {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.15)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trajectories: usize,
        /// Window ends at exp(theta_P / eps) and jumps are checked against T_P
        /// of the min-arc-set sweep. Defaults to the last level.
        #[arg(long)]
        level: Option<usize>,
        /// Explicit window `lo:hi` in absolute time, overriding the level's.
        #[arg(long)]
        window: Option<String>,
        /// Initial state, repeatable; all states in turn when omitted.
        #[arg(long = "start")]
        start: Vec<String>,
        /// Also write the census as CSV.
        #[arg(long)]
        csv: Option<String>,
    },
    /// Sweep the switching exponent of the built-in kinesin model.
    KinesinSweep {
        /// start:stop:step, inclusive, exact rationals.
        #[arg(long, default_value = "0.25:10.25:0.5")]
        grid: String,
        /// Pin boundaries exactly by rational bisection.
        #[arg(long)]
        bisect: bool,
        #[arg(long, default_value = "2")]
        psi: String,
    },
    /// Graphviz DOT of the graph or of one T-graph.
    ExportDot {
        #[command(flatten)]
        input: InputArgs,
        /// Draw a T-graph of this sweep instead of the whole graph.
        #[arg(long, value_enum)]
        sweep: Option<Sweep>,
        /// Step of the T-graph; the last one when omitted.
        #[arg(long)]
        step: Option<usize>,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn parse_stop(s: &str) -> Result<StopSpec, String> {
    s.parse().map_err(|e: metachain::stop::StopParseError| e.to_string())
}

/// Exit 1: the input or the request is wrong. Exit 2: a result broke an
/// invariant, which means a bug.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Invariant(_) => 2,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Output text plus an optional invariant failure to report after writing it.
struct Outcome {
    text: String,
    failure: Option<String>,
}

impl Outcome {
    fn json(v: &Value) -> Outcome {
        Outcome {
            text: report::render(v),
            failure: None,
        }
    }
}

fn load(args: &InputArgs) -> Result<ChainGraph, CliError> {
    let text =
        fs::read_to_string(&args.input).map_err(|e| CliError::Input(format!("cannot read `{}`: {e}", args.input)))?;
    let format = args.format.unwrap_or_else(|| Format::from_path(&args.input));
    parse_graph(&text, format).map_err(|e| CliError::Input(format!("{}: {e}", args.input)))
}

fn resolve(g: &ChainGraph, s: &StopSpec) -> Result<StopCriterion, CliError> {
    s.resolve(g).map_err(input_err)
}

fn state(g: &ChainGraph, name: &str) -> Result<usize, CliError> {
    g.state_index(name)
        .ok_or_else(|| CliError::Input(format!("unknown state `{name}`")))
}

fn parse_window(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Input(format!("window `{s}` must be lo:hi with 0 <= lo < hi"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if lo >= 0.0 && hi > lo && hi.is_finite() {
        Ok((lo, hi))
    } else {
        Err(bad())
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Validate(input) => {
            let g = load(&input)?;
            Ok(Outcome::json(&report::validation(&validate(&g))))
        }
        Command::Alg1 {
            input,
            sweep,
            tie_break,
        } => {
            let g = load(&input)?;
            let opts = Alg1Options {
                stop: resolve(&g, &sweep.stop)?,
                tie_break: tie_break.into(),
            };
            let r = run_algorithm1_with(&g, &opts);
            let k_minus_nc = r.steps() as i64 - r.n_cycles() as i64;
            let mut out = Outcome::json(&report::alg1(&g, &r));
            if matches!(opts.stop, StopCriterion::BucketEmpty)
                && r.final_sink().is_some()
                && k_minus_nc != g.n() as i64 - 1
            {
                out.failure = Some(format!("K - N_c = {k_minus_nc}, expected {}", g.n() - 1));
            }
            Ok(out)
        }
        Command::Alg2 { input, sweep } => {
            let g = load(&input)?;
            let r = run_algorithm2(&g, resolve(&g, &sweep.stop)?);
            Ok(Outcome::json(&report::alg2(&g, &r)))
        }
        Command::Wgraphs {
            input,
            oracle,
            oracle_cap,
        } => {
            let g = load(&input)?;
            let r = run_algorithm1_with(&g, &Alg1Options::default());
            let mut failures = Vec::new();
            let mut rows = Vec::new();
            for m in 1..g.n() {
                let w = extract_wgraph(&g, &r, m).map_err(input_err)?;
                let mut row =
                    json!({ "m": m, "wgraph": report::wgraph(&g, &w), "delta": r.delta(m).map(report::weight) });
                if oracle {
                    let opt = enumerate_optimal(&g, m, oracle_cap).map_err(input_err)?;
                    let agrees = opt.is_unique() && opt.graphs[0] == w;
                    row["enumeration_agrees"] = json!(agrees);
                    if !agrees {
                        failures.push(format!("g*_{m} differs from the enumerated optimum"));
                    }
                }
                rows.push(row);
            }
            let v = json!({ "schema": SCHEMA, "kind": "wgraphs", "wgraphs": rows });
            Ok(Outcome {
                text: report::render(&v),
                failure: (!failures.is_empty()).then(|| failures.join("; ")),
            })
        }
        Command::Eigs { input, epsilon, oracle } => {
            let g = load(&input)?;
            let r = run_algorithm1_with(&g, &Alg1Options::default());
            let est = epsilon
                .iter()
                .map(|&eps| {
                    if oracle {
                        eigenvalue_estimates_with_numerics(&g, &r, eps)
                    } else {
                        eigenvalue_estimates(&r, eps)
                    }
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(input_err)?;
            Ok(Outcome::json(&report::spectral(&est)))
        }
        Command::Oracle {
            input,
            epsilon,
            oracle_cap,
        } => {
            let g = load(&input)?;
            let o = run_oracle(&g, &epsilon, oracle_cap).map_err(input_err)?;
            Ok(Outcome {
                text: report::render(&o.json),
                failure: (!o.violations.is_empty()).then(|| o.violations.join("; ")),
            })
        }
        Command::Compare { input, tie_break } => {
            let g = load(&input)?;
            let a1 = run_algorithm1_with(
                &g,
                &Alg1Options {
                    stop: StopCriterion::BucketEmpty,
                    tie_break: tie_break.into(),
                },
            );
            let a2 = run_algorithm2(&g, StopCriterion::BucketEmpty);
            let c = compare_reports(&g, &a1, &a2);
            Ok(Outcome {
                text: report::render(&report::comparison(&c)),
                failure: (!c.all_hold()).then(|| c.violations.join("; ")),
            })
        }
        Command::Kmc {
            input,
            epsilon,
            seed,
            trajectories,
            level,
            window,
            start,
            csv,
        } => {
            let g = load(&input)?;
            let a2 = run_algorithm2(&g, StopCriterion::BucketEmpty);
            let p = level.unwrap_or(a2.steps());
            if p > a2.steps() {
                return Err(CliError::Input(format!(
                    "level {p} exceeds the {} levels of the sweep",
                    a2.steps()
                )));
            }
            let window = match window {
                Some(w) => parse_window(&w)?,
                None if p == 0 => return Err(CliError::Input("level 0 has no timescale; give --window".into())),
                None => (0.0, (a2.theta[p - 1].to_f64() / epsilon).exp()),
            };
            let starts = if start.is_empty() {
                (0..g.n()).collect()
            } else {
                start.iter().map(|s| state(&g, s)).collect::<Result<Vec<_>, _>>()?
            };
            let sim = Simulator::new(&g, epsilon).map_err(input_err)?;
            let census = census_runs(&sim, &starts, window, trajectories, seed).map_err(input_err)?;
            let coverage = census_vs_tgraph(&census, &a2.tgraph(p)).ok();
            if let Some(path) = csv {
                fs::write(&path, census.to_csv(&g))
                    .map_err(|e| CliError::Input(format!("cannot write `{path}`: {e}")))?;
            }
            let mut v = report::kmc(&g, &census, coverage.as_ref());
            v["level"] = json!(p);
            Ok(Outcome::json(&v))
        }
        Command::KinesinSweep { grid, bisect, psi } => {
            let grid = parse_grid(&grid).map_err(input_err)?;
            let params = KinesinParams {
                psi: psi
                    .parse()
                    .map_err(|e| CliError::Input(format!("--psi `{psi}`: {e}")))?,
                ..KinesinParams::default()
            };
            let r = kinesin_sweep(&params, &grid, bisect).map_err(input_err)?;
            Ok(Outcome::json(&report::sweep(&r)))
        }
        Command::ExportDot { input, sweep, step } => {
            let g = load(&input)?;
            let text = match sweep {
                None => graph_to_dot(&g),
                Some(Sweep::Alg1) => {
                    let r = run_algorithm1_with(&g, &Alg1Options::default());
                    let k = step.unwrap_or(r.steps());
                    if k > r.steps() {
                        return Err(CliError::Input(format!(
                            "step {k} exceeds the {} steps of the sweep",
                            r.steps()
                        )));
                    }
                    alg1_tgraph_dot(&g, &r, k)
                }
                Some(Sweep::Alg2) => {
                    let r = run_algorithm2(&g, StopCriterion::BucketEmpty);
                    let p = step.unwrap_or(r.steps());
                    if p > r.steps() {
                        return Err(CliError::Input(format!(
                            "step {p} exceeds the {} steps of the sweep",
                            r.steps()
                        )));
                    }
                    alg2_tgraph_dot(&g, &r, p)
                }
            };
            Ok(Outcome { text, failure: None })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.out.clone();
    let result = run(cli).and_then(|o| {
        match &out {
            Some(path) => {
                fs::write(path, &o.text).map_err(|e| CliError::Input(format!("cannot write `{path}`: {e}")))?
            }
            None => {
                let _ = std::io::stdout().write_all(o.text.as_bytes());
            }
        }
        match o.failure {
            Some(f) => Err(CliError::Invariant(f)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("metachain: {e}");
            ExitCode::from(e.code())
        }
    }
}
