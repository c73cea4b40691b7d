use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use rateless::bounds::{self, BoundFormula, BoundParams, Precision, SweepSpec, SweepTable};
use rateless::channel::{capacity, ChannelModel, ChannelSpec, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE_BITS};
use rateless::sim::{self, ExperimentConfig};
use rateless::verify::{Verifier, VerifyOptions, VerifyScale};
use rateless::ExtendedFloat;

#[derive(Parser)]
#[command(name = "rateless", version, about = "Rateless coding bounds and Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct Common {
    /// JSON input file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity and capacity-achieving prior of a channel.
    Capacity {
        #[command(flatten)]
        io: Common,
        /// Inline channel JSON, e.g. '{"type":"bsc","p":0.25}'.
        #[arg(long, conflicts_with = "config")]
        channel: Option<String>,
    },
    /// Evaluate bound formulas at one parameter point.
    Bounds {
        #[command(flatten)]
        io: Common,
    },
    /// Run a Monte Carlo experiment.
    Simulate {
        #[command(flatten)]
        io: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also write per-trial records as CSV to this path.
        #[arg(long)]
        dump_trials: Option<PathBuf>,
    },
    /// Tabulate bounds (and optionally simulations) over a grid.
    Sweep {
        #[command(flatten)]
        io: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the acceptance criteria and report PASS/FAIL per criterion.
    Verify {
        /// Reduced trial counts.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the results as JSON here as well.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run only these criteria (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, hide = true, default_value_t = 0.5)]
        kt_pseudocount: f64,
    },
}

/// Input accepted by `bounds`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsRequest {
    #[serde(default)]
    formula: Option<BoundFormula>,
    #[serde(default)]
    formulas: Vec<BoundFormula>,
    #[serde(default, alias = "params")]
    fixed: BoundParams,
    #[serde(default)]
    channel: Option<ChannelSpec>,
    #[serde(default)]
    precision: Precision,
}

#[derive(Serialize)]
struct CapacityOutput {
    capacity_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    prior: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_bound: Option<f64>,
}

enum Failure {
    Config(anyhow::Error),
    Verification,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_config(path: Option<&Path>) -> anyhow::Result<String> {
    let path = path.ok_or_else(|| anyhow!("--config is required"))?;
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> anyhow::Result<T> {
    serde_json::from_str(text).with_context(|| format!("parsing {what}"))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn json_line<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Capacity { io, channel } => {
            let text = match channel {
                Some(inline) => inline,
                None => read_config(io.config.as_deref())?,
            };
            let spec: ChannelSpec = parse(&text, "channel")?;
            let out = match spec.build()? {
                ChannelModel::Discrete(dmc) => {
                    let r = capacity(&dmc, DEFAULT_TOLERANCE_BITS, DEFAULT_MAX_ITERS)?;
                    CapacityOutput {
                        capacity_bits: r.capacity_bits,
                        prior: Some(r.optimal_prior.probs().to_vec()),
                        iterations: Some(r.iterations),
                        gap_bound: Some(r.gap_bound),
                    }
                }
                ChannelModel::Gaussian(ch) => {
                    CapacityOutput { capacity_bits: ch.capacity_bits(), prior: None, iterations: None, gap_bound: None }
                }
            };
            let bytes = match io.format.unwrap_or(Format::Json) {
                Format::Json => json_line(&out),
                Format::Csv => {
                    let prior = out.prior.map(|p| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
                    format!("capacity_bits,prior\n{},{}\n", out.capacity_bits, prior.unwrap_or_default()).into_bytes()
                }
            };
            emit(io.out.as_deref(), &bytes)?;
        }
        Command::Bounds { io } => {
            let req: BoundsRequest = parse(&read_config(io.config.as_deref())?, "bounds request")?;
            let spec = SweepSpec {
                formula: req.formula,
                formulas: req.formulas,
                fixed: req.fixed,
                channel: req.channel,
                sweep: bounds::SweepAxis {
                    variable: "capacity".into(),
                    start: 0.0,
                    stop: 0.0,
                    steps: 0,
                    scale: bounds::Scale::Linear,
                },
                precision: req.precision,
                simulate: None,
            };
            let formulas = spec.formula_list();
            if formulas.is_empty() {
                return Err(anyhow!("no formulas requested").into());
            }
            let (params, dmc) = spec.resolved_params()?;
            let mut values = serde_json::Map::new();
            for f in formulas {
                let v = match spec.precision {
                    Precision::F64 => bounds::evaluate::<f64>(f, &params, dmc.as_ref()),
                    Precision::Extended => bounds::evaluate::<ExtendedFloat>(f, &params, dmc.as_ref()),
                };
                let v = match v {
                    Ok(v) => serde_json::json!(v),
                    Err(e @ (bounds::BoundsError::MissingParameter(_) | bounds::BoundsError::UnknownVariable(_))) => {
                        return Err(anyhow!(e).into())
                    }
                    Err(e) => serde_json::json!({ "error": e.to_string() }),
                };
                values.insert(f.name().to_string(), v);
            }
            let bytes = match io.format.unwrap_or(Format::Json) {
                Format::Json => json_line(&values),
                Format::Csv => {
                    let mut s = String::from("formula,value\n");
                    for (k, v) in &values {
                        s.push_str(&format!("{k},{}\n", v.as_f64().map(|x| x.to_string()).unwrap_or_default()));
                    }
                    s.into_bytes()
                }
            };
            emit(io.out.as_deref(), &bytes)?;
        }
        Command::Simulate { io, seed, workers, dump_trials } => {
            let mut cfg = ExperimentConfig::from_json(&read_config(io.config.as_deref())?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let (report, records) = sim::run_experiment_with_records(&cfg)?;
            if let Some(path) = dump_trials {
                let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                sim::write_trials_csv(&records, io::BufWriter::new(f))?;
            }
            let bytes = match io.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut s = report.to_json();
                    s.push('\n');
                    s.into_bytes()
                }
                Format::Csv => report_csv(&report),
            };
            emit(io.out.as_deref(), &bytes)?;
        }
        Command::Sweep { io, seed, workers } => {
            let mut spec: SweepSpec = parse(&read_config(io.config.as_deref())?, "sweep spec")?;
            if let Some(sim_opts) = spec.simulate.as_mut() {
                sim_opts.seed = seed.or(sim_opts.seed);
                sim_opts.workers = workers.or(sim_opts.workers);
            }
            let formulas = spec.formula_list();
            let (params, dmc) = spec.resolved_params()?;
            let mut table = SweepTable::evaluate(&formulas, &params, &spec.sweep, dmc.as_ref(), spec.precision)?;
            sim::simulate_sweep(&spec, &mut table)?;
            let bytes = match io.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf)?;
                    buf
                }
                Format::Json => json_line(&serde_json::json!({ "columns": table.columns, "rows": table.rows })),
            };
            emit(io.out.as_deref(), &bytes)?;
        }
        Command::Verify { quick, seed, workers, out, only, kt_pseudocount } => {
            let mut opts = VerifyOptions {
                scale: if quick { VerifyScale::Quick } else { VerifyScale::Full },
                kt_pseudocount,
                ..Default::default()
            };
            if let Some(s) = seed {
                opts.seed = s;
            }
            if let Some(w) = workers {
                opts.workers = w.max(1);
            }
            let mut verifier = Verifier::new(opts);
            let ids: Vec<u8> = if only.is_empty() {
                rateless::verify::CRITERIA.iter().map(|c| c.0).collect()
            } else {
                only
            };
            let mut results = Vec::new();
            let mut stdout = io::stdout();
            for id in ids {
                let r = verifier.run(id);
                // A closed pipe should not abort the remaining criteria.
                let _ = writeln!(stdout, "{}", r.line());
                results.push(r);
            }
            if let Some(p) = out {
                fs::write(&p, json_line(&results)).with_context(|| format!("writing {}", p.display()))?;
            }
            let failed = results.iter().filter(|r| !r.pass).count();
            let skipped = results.iter().filter(|r| r.skipped).count();
            let _ = writeln!(stdout, "{} passed, {failed} failed, {skipped} skipped", results.len() - failed - skipped);
            if failed > 0 {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn report_csv(r: &sim::Report) -> Vec<u8> {
    let header = "scheme,trials,log2_m,epsilon,capacity_bits,errors,error_rate,error_ci_lo,error_ci_hi,mean_t,mean_t_ci_lo,mean_t_ci_hi,empirical_rate";
    let scheme = serde_json::to_value(r.scheme).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    format!(
        "{header}\n{scheme},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        r.trials,
        r.log2_m,
        opt(r.epsilon),
        r.capacity_bits,
        r.errors,
        r.error_rate,
        r.error_ci.lo,
        r.error_ci.hi,
        r.mean_t,
        r.mean_t_ci.lo,
        r.mean_t_ci.hi,
        opt(r.empirical_rate)
    )
    .into_bytes()
}
