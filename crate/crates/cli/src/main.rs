//! `hcs`: command-line front end of the hcschwartz workbench.

mod plot;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use hcschwartz::{
    cartan_decompose, cd_constant, generate_ball, harish_chandra_xi, length, run_suite,
    schwartz_norm, sobolev_norm, AdaptiveXi, BoundaryGrid, ChamberQuadrature, Error, GridXi,
    GroupElement, GroupFunction, QuadratureSpec, Result, RootSystemData, RunConfig, TabulatedXi,
    XiEvaluator, XiMethod,
};

#[derive(Parser, Debug)]
#[command(name = "hcs", version, about = "Harish-Chandra-Schwartz workbench")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each one overrides the config file and
/// the `HCS_*` environment.
#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in presentation: sanov, sl2z (sl2), sl3z (sl3).
    #[arg(long, global = true)]
    group: Option<String>,
    /// Generator literals, e.g. "1,2;0,1 | 1,0;2,1".
    #[arg(long, global = true)]
    generators: Option<String>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    d: Option<f64>,
    #[arg(long, global = true)]
    radius: Option<u32>,
    /// Truncation radius.
    #[arg(long = "R", global = true)]
    truncation: Option<u32>,
    /// Boundary grid size (lines for n = 2, roughly points for n = 3).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Chamber quadrature cutoff.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Single-threaded, ordered reductions.
    #[arg(long, global = true)]
    deterministic: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated statements, or "all".
    #[arg(long, global = true)]
    suite: Option<String>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    pairs: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cartan decomposition of a matrix literal.
    Cartan {
        #[arg(long)]
        matrix: String,
    },
    /// Harish-Chandra function by the boundary and Iwasawa backends.
    Xi {
        #[arg(long)]
        matrix: Option<String>,
        /// Evaluate at exp(t/2 (E_11 - E_nn)) instead of a matrix.
        #[arg(long)]
        t: Option<f64>,
        /// boundary, iwasawa or both.
        #[arg(long, default_value = "both")]
        method: String,
    },
    /// Truncated C_d integral with its tail bound.
    Cd,
    /// Enumerate a word-metric ball and write it as JSON.
    Ball,
    /// Length, Xi and delta-function norms per ball element.
    Norms,
    /// Run verification statements; exit status 0 iff all pass.
    Verify,
    /// SVG plots: Xi decay and the ratio sequences of a report.
    Plot,
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    cfg.apply_env(std::env::vars())?;
    let flags: [(&str, Option<String>); 14] = [
        ("group", c.group.clone()),
        ("generators", c.generators.clone()),
        ("n", c.n.map(|v| v.to_string())),
        ("d", c.d.map(|v| v.to_string())),
        ("radius", c.radius.map(|v| v.to_string())),
        ("R", c.truncation.map(|v| v.to_string())),
        ("grid", c.grid.map(|v| v.to_string())),
        ("cutoff", c.cutoff.map(|v| v.to_string())),
        ("seed", c.seed.map(|v| v.to_string())),
        ("deterministic", c.deterministic.then(|| "true".to_string())),
        ("out", c.out.as_ref().map(|p| p.display().to_string())),
        ("suite", c.suite.clone()),
        ("samples", c.samples.map(|v| v.to_string())),
        ("pairs", c.pairs.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    Ok(cfg)
}

/// Grid for dimension `n`: `grid` lines for n = 2, about `grid` Euler
/// nodes for n = 3.
fn grid_for(cfg: &RunConfig, n: usize) -> Result<Arc<BoundaryGrid>> {
    match n {
        3 => BoundaryGrid::new(3, ((cfg.grid as f64).cbrt().ceil() as usize).max(8)),
        _ => BoundaryGrid::new(n, cfg.grid),
    }
}

/// Dimension from `--n`, else from the presentation.
fn dimension(cfg: &RunConfig) -> Result<usize> {
    match cfg.n {
        Some(n) => Ok(n),
        None => Ok(cfg.presentation()?.dim()),
    }
}

fn xi_evaluator(cfg: &RunConfig, n: usize, max_length: f64) -> Result<Box<dyn XiEvaluator>> {
    if n == 2 {
        Ok(Box::new(TabulatedXi::for_length(max_length)?))
    } else {
        Ok(Box::new(GridXi::new(grid_for(cfg, n)?, XiMethod::Boundary)))
    }
}

fn a_t(n: usize, t: f64) -> GroupElement {
    let mut h = vec![0.0; n];
    h[0] = 0.5 * t;
    h[n - 1] = -0.5 * t;
    GroupElement::exp_diagonal(&h)
}

fn cmd_cartan(matrix: &str) -> Result<bool> {
    let g = GroupElement::parse(matrix)?;
    let t = cartan_decompose(&g)?;
    let err = (t.reconstruct().matrix() - g.matrix()).norm() / g.matrix().norm();
    println!("k1 = {}", t.k1.to_literal());
    println!("h  = {:?}", t.h.values());
    println!("k2 = {}", t.k2.to_literal());
    println!("L  = {:.12}", t.h.norm());
    println!("reconstruction error = {err:.3e}");
    Ok(true)
}

fn cmd_xi(cfg: &RunConfig, matrix: Option<&str>, t: Option<f64>, method: &str) -> Result<bool> {
    let g = match (matrix, t) {
        (Some(m), None) => GroupElement::parse(m)?,
        (None, Some(t)) => a_t(dimension(cfg)?, t),
        (None, None) => return Err(Error::Config("xi needs --matrix or --t".into())),
        (Some(_), Some(_)) => {
            return Err(Error::Config("give only one of --matrix and --t".into()))
        }
    };
    let grid = grid_for(cfg, g.dim())?;
    let methods: Vec<XiMethod> = match method {
        "both" => vec![XiMethod::Boundary, XiMethod::Iwasawa],
        m => vec![m.parse()?],
    };
    let values = methods
        .iter()
        .map(|&m| harish_chandra_xi(&g, m, &grid))
        .collect::<Result<Vec<_>>>()?;
    println!("L = {:.12}", length(&g)?);
    for (m, v) in methods.iter().zip(&values) {
        println!("{:<9} {v:.15}", format!("{m:?}").to_lowercase());
    }
    if values.len() == 2 {
        println!("delta     {:.3e}", (values[0] - values[1]).abs());
    }
    if g.dim() == 2 {
        println!("adaptive  {:.15}", AdaptiveXi::default().at_element(&g)?);
    }
    Ok(true)
}

fn cmd_cd(cfg: &RunConfig) -> Result<bool> {
    let n = dimension(cfg)?;
    let roots = RootSystemData::sl(n)?;
    let d = cfg.exponent(n)?;
    let quad = ChamberQuadrature::build(
        n,
        &QuadratureSpec {
            cutoff: cfg.cutoff,
            ..QuadratureSpec::default()
        },
    )?;
    let xi = xi_evaluator(cfg, n, cfg.cutoff)?;
    let est = cd_constant(d, &quad, xi.as_ref(), &roots)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&est).expect("serializable")
    );
    Ok(true)
}

fn cmd_ball(cfg: &RunConfig) -> Result<bool> {
    let p = cfg.presentation()?;
    let ball = generate_ball(&p, cfg.radius)?;
    let sizes: Vec<usize> = (0..=cfg.radius).map(|r| ball.prefix_len(r)).collect();
    std::fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("ball-{}-{}.json", p.name, cfg.radius));
    ball.write_json(&path, None)?;
    for (r, s) in sizes.iter().enumerate() {
        println!("|B_{r}| = {s}");
    }
    println!("wrote {}", path.display());
    Ok(true)
}

fn cmd_norms(cfg: &RunConfig) -> Result<bool> {
    let p = cfg.presentation()?;
    let n = p.dim();
    let d = cfg.exponent(n)?;
    let ball = Arc::new(generate_ball(&p, cfg.radius)?);
    let xi = xi_evaluator(cfg, n, ball.max_length())?;
    println!("index,word,L,xi,schwartz_delta,sobolev_delta");
    for i in 0..ball.len() {
        let delta = GroupFunction::delta(&ball, i)?;
        println!(
            "{i},{},{:.12e},{:.12e},{:.12e},{:.12e}",
            ball.word_string(i),
            ball.length(i),
            xi.at_chamber(&ball.chamber(i))?,
            schwartz_norm(&delta, d, xi.as_ref())?,
            sobolev_norm(&delta, d)?,
        );
    }
    Ok(true)
}

fn cmd_verify(cfg: &RunConfig) -> Result<bool> {
    let bundle = run_suite(cfg)?;
    let written = bundle.write(&cfg.out)?;
    for r in &bundle.reports {
        let worst = r
            .residuals
            .iter()
            .map(|(k, v)| format!("{k}={v:.3e}/{:.1e}", r.tolerances[k]))
            .collect::<Vec<_>>()
            .join(" ");
        println!(
            "{} {:<18} {worst}",
            if r.passed { "PASS" } else { "FAIL" },
            r.statement_id
        );
    }
    println!("wrote {} files to {}", written.len(), cfg.out.display());
    Ok(bundle.passed())
}

fn cmd_plot(cfg: &RunConfig) -> Result<bool> {
    let written = plot::write_plots(cfg)?;
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(&cli.common)?;
    let threads = if cfg.deterministic {
        Some(1)
    } else {
        cli.common.threads
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Cartan { matrix } => cmd_cartan(matrix),
        Command::Xi { matrix, t, method } => cmd_xi(&cfg, matrix.as_deref(), *t, method),
        Command::Cd => cmd_cd(&cfg),
        Command::Ball => cmd_ball(&cfg),
        Command::Norms => cmd_norms(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Plot => cmd_plot(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
