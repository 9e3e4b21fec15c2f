use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nodedp::block::{estimate_blocks, EstimatorConfig};
use nodedp::density::{
    extended_density_estimator, laplace_density_estimator, restricted_density_estimator, HomogeneityConfig,
};
use nodedp::experiment::{
    audit_dp_exhaustive, audit_reduction, audit_score_sensitivity, homogeneity_probability, records_to_csv,
    run_distinguishability_experiment, run_mse_experiment, AuditMechanism, ExperimentConfig,
};
use nodedp::graph::{from_edge_list, to_edge_list};
use nodedp::graphon::{sample_gnm, sample_gnm_rewired, sample_w_random, BlockMatrix, StepGraphon};
use nodedp::mech::AUDIT_TOLERANCE;
use nodedp::rng::stream;
use nodedp::LabeledGraph;

#[derive(Parser)]
#[command(name = "nodedp", version, about = "Node-differentially-private estimation for random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random graph and print it as an edge list.
    Sample(SampleArgs),
    #[command(subcommand)]
    Estimate(Estimate),
    #[command(subcommand)]
    Audit(Audit),
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleModel {
    Gnm,
    Gnp,
    Sbm,
    Rewired,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    model: SampleModel,
    #[arg(long)]
    n: usize,
    /// Edge count (gnm, rewired).
    #[arg(long)]
    m: Option<usize>,
    /// Edge probability (gnp).
    #[arg(long)]
    p: Option<f64>,
    /// Extra first-stage edges (rewired).
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Graphon file: k, boundaries, then k rows (sbm).
    #[arg(long)]
    graphon: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DensityModeArg {
    Baseline,
    Restricted,
    Extended,
    Promise,
}

#[derive(Subcommand)]
enum Estimate {
    /// Private edge density; prints one JSON line.
    Density {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = DensityModeArg::Baseline)]
        mode: DensityModeArg,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long = "C", default_value_t = nodedp::density::DEFAULT_C)]
        c: f64,
        /// Run the homogeneous-graph mechanism on any input; private on H only.
        #[arg(long = "promise-in-H")]
        promise_in_h: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Private block matrix; prints one JSON line.
    Blocks {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Measure the score sensitivity over all graphs (n <= 6).
        #[arg(long)]
        audited: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AuditTarget {
    Laplace,
    Extended,
    Blocks,
}

#[derive(Subcommand)]
enum Audit {
    /// Exhaustive privacy audit over every graph on n vertices.
    Dp {
        #[arg(long, value_enum)]
        mechanism: AuditTarget,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        /// Multiplies the Laplace scale; values below one break privacy.
        #[arg(long, default_value_t = 1.0)]
        scale_factor: f64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long = "C", default_value_t = nodedp::density::DEFAULT_C)]
        c: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Write the per-pair CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Measured sensitivity of the capped score.
    Sensitivity {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        mu: f64,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Monte Carlo MSE grid from a config file (JSON or key = value).
    Mse {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path; stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupled rewired-model checks.
    Coupling {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fraction of G(n,p) samples outside the homogeneity set.
    Homogeneity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long = "C", default_value_t = nodedp::density::DEFAULT_C)]
        c: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Audit of the Laplace baseline composed with the two-clique reduction.
    Reduction {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
    },
}

fn read_graph(path: &PathBuf) -> Result<LabeledGraph> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    Ok(from_edge_list(&text)?)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn matrix_rows(b: &BlockMatrix<f64>) -> Value {
    json!((0..b.k()).map(|i| (0..b.k()).map(|j| *b.get(i, j)).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn sample(a: SampleArgs) -> Result<()> {
    let rng = &mut stream(a.seed);
    let need = |v: Option<usize>, name: &str| v.with_context(|| format!("--{name} is required for this model"));
    let g = match a.model {
        SampleModel::Gnm => sample_gnm(a.n, need(a.m, "m")?, rng)?,
        SampleModel::Rewired => sample_gnm_rewired(a.n, need(a.m, "m")?, a.k, rng)?,
        SampleModel::Gnp => {
            let p = a.p.context("--p is required for gnp")?;
            sample_w_random(&StepGraphon::equal_blocks(BlockMatrix::constant(1, 1.0)?), p, a.n, rng)?.graph
        }
        SampleModel::Sbm => {
            let path = a.graphon.context("--graphon is required for sbm")?;
            let w = StepGraphon::from_text(&fs::read_to_string(&path)?)?;
            sample_w_random(&w, a.rho, a.n, rng)?.graph
        }
    };
    emit(&to_edge_list(&g), a.out.as_ref())
}

fn estimate(cmd: Estimate) -> Result<()> {
    let line = match cmd {
        Estimate::Density { input, epsilon, mode, rho, c, promise_in_h, seed } => {
            let g = read_graph(&input)?;
            let rng = &mut stream(seed);
            let est = match mode {
                DensityModeArg::Baseline => laplace_density_estimator(&g, epsilon, rng)?,
                DensityModeArg::Restricted => restricted_density_estimator(&g, epsilon, &HomogeneityConfig::new(rho, c)?, rng)?,
                DensityModeArg::Extended | DensityModeArg::Promise => {
                    let promise = promise_in_h || mode == DensityModeArg::Promise;
                    extended_density_estimator(&g, epsilon, &HomogeneityConfig::new(rho, c)?, promise, rng)?
                }
            };
            serde_json::to_value(est)?
        }
        Estimate::Blocks { input, epsilon, lambda, k, audited, seed } => {
            let g = read_graph(&input)?;
            let mut cfg = EstimatorConfig::new(epsilon, lambda, k)?;
            if audited {
                cfg = cfg.audited();
            }
            let est = estimate_blocks(&g, &cfg, &mut stream(seed))?;
            let mut v = serde_json::to_value(&est)?;
            v["b_hat"] = matrix_rows(&est.b_hat);
            v["b_hat_normalized"] = matrix_rows(&est.normalized());
            v
        }
    };
    println!("{line}");
    Ok(())
}

/// Returns whether a violation was found.
fn audit(cmd: Audit) -> Result<bool> {
    match cmd {
        Audit::Dp { mechanism, n, epsilon, scale_factor, rho, c, lambda, k, csv } => {
            let mech = match mechanism {
                AuditTarget::Laplace => AuditMechanism::Laplace { scale_factor },
                AuditTarget::Extended => AuditMechanism::ExtendedDensity { cfg: HomogeneityConfig::new(rho, c)? },
                AuditTarget::Blocks => AuditMechanism::Blocks { lambda, k },
            };
            let report = audit_dp_exhaustive(&mech, n, epsilon)?;
            if let Some(path) = csv {
                fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            let components: Vec<Value> = report
                .components
                .iter()
                .map(|c| {
                    let w = c.report.witness.as_ref();
                    json!({
                        "name": c.name,
                        "epsilon": c.report.epsilon,
                        "max_violation": c.report.max_violation,
                        "pairs": c.report.rows.len(),
                        "witness": w.map(|w| json!({"i": w.i, "j": w.j, "d_v": w.distance, "q": w.q, "log_ratio": w.log_ratio})),
                    })
                })
                .collect();
            println!(
                "{}",
                json!({"mechanism": report.mechanism, "n": n, "epsilon": epsilon, "max_violation": report.max_violation(),
                       "passes": report.passes(), "components": components})
            );
            Ok(!report.passes())
        }
        Audit::Sensitivity { n, k, d, mu } => {
            let a = audit_score_sensitivity(n, k, d, mu)?;
            println!("{}", serde_json::to_value(&a)?);
            Ok(!a.within_theory)
        }
    }
}

fn experiment(cmd: Experiment) -> Result<bool> {
    match cmd {
        Experiment::Mse { config, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::parse(&text)?;
            let records = run_mse_experiment(&cfg)?;
            for r in &records {
                eprintln!("n={} epsilon={} mse={:.4e} wall={:.2}s", r.n, r.epsilon, r.mse, r.wall_seconds);
                if let Some(e) = &r.first_error {
                    eprintln!("  {} failed trials, first error: {e}", r.errors);
                }
            }
            let out = out.or(cfg.output.map(PathBuf::from));
            emit(&records_to_csv(&records), out.as_ref())?;
            Ok(false)
        }
        Experiment::Coupling { n, m, k, trials, seed } => {
            let r = run_distinguishability_experiment(n, m, k, trials, seed)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", serde_json::to_value(&r)?);
            Ok(r.structural_violations > 0)
        }
        Experiment::Homogeneity { n, p, rho, c, samples, seed } => {
            let r = homogeneity_probability(n, p, &HomogeneityConfig::new(rho, c)?, samples, seed)?;
            println!("{}", serde_json::to_value(&r)?);
            Ok(false)
        }
        Experiment::Reduction { n, epsilon } => {
            let r = audit_reduction(n, epsilon)?;
            let pass = r.passes(AUDIT_TOLERANCE);
            println!("{}", json!({"n": n, "epsilon": epsilon, "max_violation": r.max_violation, "pairs": r.rows.len(), "passes": pass}));
            Ok(!pass)
        }
    }
}

fn run() -> Result<bool> {
    match Cli::parse().command {
        Command::Sample(a) => sample(a).map(|_| false),
        Command::Estimate(e) => estimate(e).map(|_| false),
        Command::Audit(a) => audit(a),
        Command::Experiment(e) => experiment(e),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
