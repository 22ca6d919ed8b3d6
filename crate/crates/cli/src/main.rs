use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pcsvs_core::engine::single_engine;
use pcsvs_core::ideal::benchmarks;
use pcsvs_core::sweep::{self, scaled_delta, Cell, EtaSearch, SweepSpec, Table};
use pcsvs_core::{ClosedForm, EngineKind, Error, FockOracle, LossChannel, PhaseEngine, SystemParams};

/// Largest scaled disagreement tolerated between the two engines.
const ENGINE_TOLERANCE: f64 = 1e-8;

const EXIT_CONFIG: u8 = 2;
const EXIT_DISAGREEMENT: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser)]
#[command(name = "pcsvs", version, about = "Phase estimation with photon-catalyzed squeezed vacuum")]
struct Cli {
    /// Evaluation route; `both` runs the closed form and the Fock simulation side by side.
    #[arg(long, global = true)]
    engine: Option<EngineKind>,

    /// Fock-space truncation for the oracle (chosen per point when omitted).
    #[arg(long, global = true)]
    nmax: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    m: u32,
}

impl ParamArgs {
    fn params(&self) -> pcsvs_core::Result<SystemParams> {
        SystemParams::new(self.alpha, self.r, self.eta, self.m)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LossKind {
    External,
    Internal,
    QfiLossy,
}

#[derive(Subcommand)]
enum Command {
    /// Success probability, mean photon number of the catalyzed mode, total N̄.
    State(ParamArgs),
    /// Parity expectation at the output port.
    Parity {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
    },
    /// Phase sensitivity Δφ from error propagation of the parity signal.
    Sensitivity {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
    },
    /// Quantum Fisher information of the probe state.
    Qfi(ParamArgs),
    /// Quantum Cramér-Rao bound with the SQL and HL benchmarks.
    Qcrb(ParamArgs),
    /// Photon-loss results: parity and Δφ under a loss channel, or the lossy QFI.
    Loss {
        #[arg(value_enum)]
        kind: LossKind,
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<f64>,
        /// Transmissivity of the loss beam splitter.
        #[arg(long)]
        t: f64,
    },
    /// Transmissivity η minimizing Δφ at fixed (α, r, m).
    OptimizeEta {
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 0.01)]
        floor: f64,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        /// Skip the golden-section refinement.
        #[arg(long)]
        no_refine: bool,
    },
    /// Evaluate a JSON sweep specification.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the dataset behind a figure panel as fig<id>.csv plus fig<id>.json.
    Figure {
        id: String,
        #[arg(long)]
        out: PathBuf,
        /// Re-evaluate a subsample with the oracle and record the comparison.
        #[arg(long)]
        crosscheck: bool,
    },
}

struct Outcome {
    text: String,
    code: u8,
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => format!("{:#}\n", table.to_json()),
    }
}

type Quantity<'a> = (&'static str, Box<dyn Fn(&dyn PhaseEngine) -> pcsvs_core::Result<f64> + 'a>);

/// Evaluate named quantities at a single point with one or both engines.
fn point_table(kind: EngineKind, n_max: Option<usize>, quantities: &[Quantity]) -> anyhow::Result<(Table, f64)> {
    if kind != EngineKind::Both {
        let engine = single_engine(kind, n_max)?;
        let names = quantities.iter().map(|(n, _)| n.to_string()).collect();
        let mut table = Table::new(names);
        let mut row = Vec::new();
        for (_, f) in quantities {
            row.push(Cell::Num(f(engine.as_ref())?));
        }
        table.rows.push(row);
        return Ok((table, 0.0));
    }
    let oracle = FockOracle::new(n_max);
    let mut cols = Vec::new();
    let mut row = Vec::new();
    let mut worst = 0.0f64;
    for (name, f) in quantities {
        let cf = f(&ClosedForm)?;
        let or = f(&oracle)?;
        let d = scaled_delta(cf, or);
        worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
        for suffix in ["cf", "oracle", "absdelta", "reldelta"] {
            cols.push(format!("{name}_{suffix}"));
        }
        row.extend([cf, or, (cf - or).abs(), (cf - or).abs() / cf.abs()].map(Cell::Num));
    }
    let mut table = Table::new(cols);
    table.rows.push(row);
    Ok((table, worst))
}

fn point_outcome(cli: &Cli, quantities: &[Quantity]) -> anyhow::Result<Outcome> {
    let (table, worst) = point_table(cli.engine.unwrap_or_default(), cli.nmax, quantities)?;
    let code = if worst > ENGINE_TOLERANCE {
        eprintln!("engines disagree: scaled delta {worst:e} exceeds {ENGINE_TOLERANCE:e}");
        EXIT_DISAGREEMENT
    } else {
        0
    };
    Ok(Outcome {
        text: render(&table, cli.format),
        code,
    })
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::State(a) => {
            let p = a.params()?;
            point_outcome(
                cli,
                &[
                    ("pm", Box::new(move |e| e.success_probability(&p))),
                    ("nbar_b", Box::new(move |e| e.mean_photon_b(&p))),
                    ("nbar", Box::new(move |e| e.nbar(&p))),
                ],
            )
        }
        Command::Parity { p, phi } => {
            let (p, phi) = (p.params()?, *phi);
            point_outcome(cli, &[("parity", Box::new(move |e| e.parity(&p, phi)))])
        }
        Command::Sensitivity { p, phi } => {
            let (p, phi) = (p.params()?, *phi);
            point_outcome(
                cli,
                &[
                    ("parity", Box::new(move |e| e.parity(&p, phi))),
                    ("sensitivity", Box::new(move |e| e.sensitivity(&p, phi))),
                ],
            )
        }
        Command::Qfi(a) => {
            let p = a.params()?;
            point_outcome(cli, &[("qfi", Box::new(move |e| e.qfi(&p)))])
        }
        Command::Qcrb(a) => {
            let p = a.params()?;
            point_outcome(
                cli,
                &[
                    ("qcrb", Box::new(move |e| e.qcrb(&p))),
                    ("sql", Box::new(move |e| Ok(benchmarks(e.nbar(&p)?)?.0))),
                    ("hl", Box::new(move |e| Ok(benchmarks(e.nbar(&p)?)?.1))),
                ],
            )
        }
        Command::Loss { kind, p, phi, t } => {
            let (p, t) = (p.params()?, *t);
            let channel = match kind {
                LossKind::QfiLossy => {
                    return point_outcome(
                        cli,
                        &[
                            ("f_ql", Box::new(move |e| e.qfi_lossy(&p, t))),
                            ("qcrb_l", Box::new(move |e| e.qcrb_lossy(&p, t))),
                        ],
                    )
                }
                LossKind::External => LossChannel::External,
                LossKind::Internal => LossChannel::Internal,
            };
            let phi = phi.ok_or_else(|| Error::Config("--phi is required for a loss channel".into()))?;
            point_outcome(
                cli,
                &[
                    ("parity", Box::new(move |e| e.parity_lossy(&p, phi, channel, t))),
                    ("sensitivity", Box::new(move |e| e.sensitivity_lossy(&p, phi, channel, t))),
                ],
            )
        }
        Command::OptimizeEta {
            alpha,
            r,
            m,
            phi,
            floor,
            step,
            no_refine,
        } => {
            let search = EtaSearch {
                floor: *floor,
                step: *step,
                refine: !no_refine,
                ..EtaSearch::default()
            };
            let p = SystemParams::new(*alpha, *r, 1.0, *m)?;
            let res = sweep::optimize_eta(&p, *phi, search)?;
            let mut cols = vec!["phi".to_string(), "eta_opt".to_string(), "sensitivity_at_opt".to_string()];
            let mut row = vec![Cell::Num(res.phi), Cell::Num(res.eta_opt), Cell::Num(res.sensitivity_at_opt)];
            let mut code = 0;
            let kind = cli.engine.unwrap_or_default();
            if kind != EngineKind::ClosedForm {
                let oracle = FockOracle::new(cli.nmax).sensitivity(&p.with_eta(res.eta_opt), *phi)?;
                cols.push("sensitivity_oracle".into());
                row.push(Cell::Num(oracle));
                if kind == EngineKind::Both && scaled_delta(res.sensitivity_at_opt, oracle) > ENGINE_TOLERANCE {
                    code = EXIT_DISAGREEMENT;
                }
            }
            let mut table = Table::new(cols);
            table.rows.push(row);
            Ok(Outcome {
                text: render(&table, cli.format),
                code,
            })
        }
        Command::Sweep { spec, out } => {
            let text = std::fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut spec = SweepSpec::from_json(&text)?;
            if let Some(kind) = cli.engine {
                spec.engine = kind;
            }
            if cli.nmax.is_some() {
                spec.n_max = cli.nmax;
            }
            let report = sweep::run_sweep(&spec)?;
            let body = match cli.format {
                Format::Csv => report.table.to_csv(),
                Format::Json => {
                    let mut v = report.table.to_json();
                    v["spec"] = serde_json::to_value(&spec)?;
                    if spec.engine == EngineKind::Both {
                        v["max_scaled_delta"] = serde_json::json!(report.max_scaled_delta);
                    }
                    format!("{v:#}\n")
                }
            };
            let code = if report.all_degenerate {
                eprintln!("every grid point is degenerate");
                EXIT_DEGENERATE
            } else if report.max_scaled_delta > ENGINE_TOLERANCE {
                eprintln!(
                    "engines disagree: max scaled delta {:e} exceeds {ENGINE_TOLERANCE:e}",
                    report.max_scaled_delta
                );
                EXIT_DISAGREEMENT
            } else {
                if spec.engine == EngineKind::Both {
                    eprintln!("max scaled delta {:e}", report.max_scaled_delta);
                }
                0
            };
            match out {
                Some(path) => {
                    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
                    Ok(Outcome { text: String::new(), code })
                }
                None => Ok(Outcome { text: body, code }),
            }
        }
        Command::Figure { id, out, crosscheck } => {
            let kind = cli.engine.unwrap_or_default();
            if kind == EngineKind::Oracle {
                return Err(Error::Config(
                    "figures are computed with the closed form; use --engine both or --crosscheck for an oracle pass".into(),
                )
                .into());
            }
            let data = sweep::figure(id, *crosscheck || kind == EngineKind::Both)?;
            std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            let csv = out.join(format!("fig{id}.csv"));
            let json = out.join(format!("fig{id}.json"));
            std::fs::write(&csv, data.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
            std::fs::write(&json, format!("{:#}\n", data.sidecar()))
                .with_context(|| format!("writing {}", json.display()))?;
            let mut code = 0;
            if let Some(c) = &data.crosscheck {
                eprintln!(
                    "oracle cross-check: {} points, max relative difference {:e}",
                    c.points.len(),
                    c.max_rel
                );
                if !c.passed {
                    code = EXIT_DISAGREEMENT;
                }
            }
            Ok(Outcome {
                text: format!("{}\n{}\n", csv.display(), json.display()),
                code,
            })
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<std::io::Error>().is_some() || err.downcast_ref::<serde_json::Error>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Domain(_) | Error::Io(_)) => EXIT_CONFIG,
        Some(Error::Consistency(_)) => EXIT_DISAGREEMENT,
        Some(Error::Degenerate(_)) => EXIT_DEGENERATE,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::from(outcome.code)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
