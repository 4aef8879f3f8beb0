use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use algpois::config::ScenarioConfig;
use algpois::export::{svg_plot, write_csv, Table};
use algpois::report::Report;
use algpois::suites::{self, FlowOutput};
use algpois::{CliError, EXIT_PASS, EXIT_RESIDUAL};
use algpois_core::loopext::Derivative;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "algpois",
    version,
    about = "Poisson structures from Lie group actions"
)]
struct Cli {
    /// TOML scenario file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed (ALGPOIS_SEED takes precedence).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Jacobi, equivariance and algebroid residuals for one action.
    Validate {
        #[arg(long)]
        action: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Compatibility of two actions and the Jacobi identity of their pencil.
    Compat {
        #[arg(long)]
        first: Option<String>,
        #[arg(long)]
        second: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Integrate a Hamiltonian flow.
    Flow {
        /// Catalog action, `jet(<action>,<order>)` or `lie-poisson(<algebra>)`.
        #[arg(long)]
        structure: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Integrate in moving-frame coordinates on the jets of the projective line.
    Frame {
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Horizon of the comparison with the full flow; 0 disables it.
        #[arg(long, default_value_t = 1.0)]
        compare_t: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Cocycle, central-extension and pencil checks on loop algebras.
    Loop {
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        action: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        /// `spectral` or `central4`.
        #[arg(long)]
        derivative: Option<String>,
    },
    /// Group laws of the ∗-product and the bracket from conjugation.
    Stargroup {
        #[arg(long)]
        action: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// List actions, algebras and Hamiltonian presets.
    Catalog,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name or polynomial in z1…, xi1….
    #[arg(long)]
    hamiltonian: Option<String>,
    /// Comma-separated initial state.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Also run the step-halving order check at this step.
    #[arg(long)]
    order_dt: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Column on the SVG x axis.
    #[arg(long)]
    svg_x: Option<String>,
    /// Columns plotted on the SVG, comma-separated.
    #[arg(long, value_delimiter = ',')]
    svg_y: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("algpois: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    let seed = || cfg.resolve_seed(cli.seed);
    let report = match cli.cmd {
        Cmd::Validate { action, samples } => suites::validate(&suites::ValidateParams {
            action: required(action.or(cfg.action.name.clone()), "action")?,
            samples: samples.or(cfg.validate.samples).unwrap_or(50),
            seed: seed()?,
        })?,
        Cmd::Compat {
            first,
            second,
            samples,
        } => suites::compat(&suites::CompatParams {
            first: required(first.or(cfg.action.name.clone()), "first")?,
            second: required(second.or(cfg.action.second.clone()), "second")?,
            samples: samples.or(cfg.validate.samples).unwrap_or(50),
            seed: seed()?,
        })?,
        Cmd::Flow { structure, run } => {
            let out = suites::flow(&suites::FlowParams {
                structure: required(structure.or(cfg.action.name.clone()), "structure")?,
                hamiltonian: hamiltonian(&run, &cfg)?,
                init: required(run.init.clone().or(cfg.init.clone()), "init")?,
                t_end: run.t_end.or(cfg.integrator.t_end).unwrap_or(10.0),
                dt: run.dt.or(cfg.integrator.dt).unwrap_or(1e-3),
                order_dt: run.order_dt,
            })?;
            emit(&out, &run, &cfg, "z1")?
        }
        Cmd::Frame {
            order,
            compare_t,
            run,
        } => {
            let init = vec![1.0; order + 4];
            let out = suites::frame(&suites::FrameParams {
                order,
                hamiltonian: run
                    .hamiltonian
                    .clone()
                    .or(cfg_hamiltonian(&cfg))
                    .unwrap_or_else(|| "jet-energy".into()),
                init: run.init.clone().or(cfg.init.clone()).unwrap_or(init),
                t_end: run.t_end.or(cfg.integrator.t_end).unwrap_or(5.0),
                dt: run.dt.or(cfg.integrator.dt).unwrap_or(1e-3),
                compare_t,
                order_dt: run.order_dt,
            })?;
            emit(&out, &run, &cfg, "u")?
        }
        Cmd::Loop {
            algebra,
            action,
            n,
            degree,
            trials,
            alpha,
            r,
            derivative,
        } => {
            let l = &cfg.loop_ext;
            let derivative = match derivative.or(l.derivative.clone()).as_deref() {
                None | Some("spectral") => Derivative::Spectral,
                Some("central4") => Derivative::Central4,
                Some(o) => return Err(CliError::Config(format!("unknown derivative `{o}`"))),
            };
            suites::loop_suite(&suites::LoopParams {
                algebra: algebra
                    .or(l.algebra.clone())
                    .unwrap_or_else(|| "sl2".into()),
                action: action
                    .or(l.action.clone())
                    .unwrap_or_else(|| "sl2-projective".into()),
                n: n.or(l.n).unwrap_or(256),
                degree: degree.or(l.degree).unwrap_or(8),
                trials: trials.or(l.trials).unwrap_or(5),
                alpha: alpha.or(l.alpha).unwrap_or(1.0),
                r: r.or(l.r).unwrap_or(-1.0),
                derivative,
                seed: seed()?,
            })?
        }
        Cmd::Stargroup {
            action,
            eps,
            points,
            threshold,
        } => {
            let s = &cfg.stargroup;
            suites::stargroup(&suites::StarParams {
                action: action
                    .or(cfg.action.name.clone())
                    .unwrap_or_else(|| "sl2-projective".into()),
                eps: eps.or(s.eps).unwrap_or(1e-3),
                points: points.or(s.points).unwrap_or(20),
                threshold: threshold.or(s.threshold).unwrap_or(0.5),
                seed: seed()?,
            })?
        }
        Cmd::Catalog => suites::catalog(),
    };
    write_report(&report, cli.json.as_deref().or(cfg.output.json.as_deref()))?;
    Ok(if report.passed() {
        EXIT_PASS
    } else {
        EXIT_RESIDUAL
    })
}

fn required<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing `{what}` (flag or config file)")))
}

fn cfg_hamiltonian(cfg: &ScenarioConfig) -> Option<String> {
    cfg.hamiltonian
        .expr
        .clone()
        .or(cfg.hamiltonian.preset.clone())
}

fn hamiltonian(run: &RunArgs, cfg: &ScenarioConfig) -> Result<String, CliError> {
    required(
        run.hamiltonian.clone().or(cfg_hamiltonian(cfg)),
        "hamiltonian",
    )
}

fn emit(
    out: &FlowOutput,
    run: &RunArgs,
    cfg: &ScenarioConfig,
    default_y: &str,
) -> Result<Report, CliError> {
    let mut report = out.report.clone();
    if let Some(path) = run.csv.as_ref().or(cfg.output.csv.as_ref()) {
        let f = fs::File::create(path).map_err(|e| io(path, e))?;
        write_csv(&out.table, std::io::BufWriter::new(f))?;
        report.info("csv", path.display().to_string());
    }
    if let Some(path) = run.svg.as_ref().or(cfg.output.svg.as_ref()) {
        let x = run
            .svg_x
            .clone()
            .or(cfg.output.svg_x.clone())
            .unwrap_or_else(|| "t".into());
        let ys = run
            .svg_y
            .clone()
            .or(cfg.output.svg_y.clone())
            .unwrap_or_else(|| vec![default_y.into()]);
        write_svg(&out.table, &x, &ys, &out.report.command, path)?;
        report.info("svg", path.display().to_string());
    }
    Ok(report)
}

fn write_svg(
    table: &Table,
    x: &str,
    ys: &[String],
    title: &str,
    path: &Path,
) -> Result<(), CliError> {
    let svg = svg_plot(table, x, ys, title)?;
    fs::write(path, svg).map_err(|e| io(path, e))
}

fn write_report(report: &Report, path: Option<&Path>) -> Result<(), CliError> {
    let text = report.to_string_pretty();
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
