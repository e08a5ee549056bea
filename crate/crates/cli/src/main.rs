use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blowuplab_cli::compare::{self, CompareReport};
use blowuplab_cli::output::out_root;
use blowuplab_cli::simulate::{self, FitSpec, SimulateReport};
use blowuplab_cli::{dump, manifest, predict, CliError, CliResult};
use blowuplab_meshsim::config::InitialData;
use blowuplab_meshsim::{FitKind, SimConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "blowuplab", version, about = "Blow-up rates of the corotational harmonic map heat flow")]
struct Cli {
    /// Output root; overrides BLOWUPLAB_OUT.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print JSON instead of the human-readable report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted blow-up rate law and constants for (d, k, N).
    Predict {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Mode index; defaults to the neutral or first admissible mode.
        #[arg(short = 'N', long = "N")]
        n: Option<usize>,
    },
    /// Run simulations from config files, a sweep file or flags.
    Simulate(SimulateArgs),
    /// Refit the trace of a run directory.
    Fit {
        run_dir: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Exponent of (−log(T−t) − s0) for log fits.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Decades of T−t used by power fits.
        #[arg(long, default_value_t = simulate::DEFAULT_DECADES)]
        decades: f64,
        /// e-foldings of T−t used by log fits.
        #[arg(long, default_value_t = simulate::DEFAULT_EFOLDS)]
        efolds: f64,
    },
    /// Compare fitted rates of run directories with the prediction.
    Compare {
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
    },
    /// Dump the harmonic map profile as CSV.
    ProfileDump {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Dump the eigenfunctions of the linearized flow as CSV.
    BasisDump {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, default_value_t = 12.0)]
        y_max: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Check the sha256 manifest of an output directory.
    Verify { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Power,
    Log,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config files, one run each.
    configs: Vec<PathBuf>,
    /// JSON file holding an array of configs.
    #[arg(long)]
    sweep: Option<PathBuf>,
    /// Worker threads for multiple runs.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    /// Initial data family: r, r+sin(r), r-sin(r), r^k.
    #[arg(long)]
    initial: Option<String>,
    #[arg(long = "M")]
    nodes: Option<usize>,
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long)]
    max_gradient: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
}

impl SimulateArgs {
    fn overrides(&self, c: &mut SimConfig) {
        if let Some(v) = self.d {
            c.d = v;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = &self.initial {
            c.initial_data = InitialData::Named(v.clone());
        }
        if let Some(v) = self.nodes {
            c.nodes = v;
        }
        if let Some(v) = self.length {
            c.length = v;
        }
        if let Some(v) = self.max_gradient {
            c.max_gradient = v;
        }
        if let Some(v) = self.t_max {
            c.t_max = v;
        }
        if let Some(v) = self.rtol {
            c.tolerances.rtol = v;
        }
        if let Some(v) = self.atol {
            c.tolerances.atol = v;
        }
    }

    fn configs(&self) -> CliResult<Vec<SimConfig>> {
        let mut out = Vec::new();
        for p in &self.configs {
            out.push(simulate::read_config(p)?);
        }
        if let Some(s) = &self.sweep {
            out.extend(simulate::read_sweep(s)?);
        }
        if out.is_empty() {
            let d = self.d.ok_or_else(|| CliError::Config("give a config file, --sweep or at least --d".into()))?;
            out.push(SimConfig::new(d, self.k.unwrap_or(1), self.initial.as_deref().unwrap_or("r")));
        }
        for c in &mut out {
            self.overrides(c);
            c.validate()?;
        }
        Ok(out)
    }
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) -> CliResult<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", text());
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
}

fn render_sim(r: &SimulateReport) -> String {
    let mut s = format!("{}\n  outcome {:?}  steps {}  rejected {}  snapshots {}  status {}\n", r.dir.display(), r.outcome, r.steps, r.rejected, r.snapshots, r.status);
    if let Some(f) = &r.fit {
        s += &format!(
            "  {:?}: T = {:.12}  beta = {} ± {}  C = {} ± {}  R² = {:.7}\n",
            f.kind,
            f.t_blowup,
            opt(f.beta),
            opt(f.beta_uncertainty),
            opt(f.c),
            opt(f.c_uncertainty),
            f.r_squared
        );
    }
    s
}

fn render_compare(r: &CompareReport) -> String {
    let mut s = format!("{}\n", r.out_dir.display());
    for c in &r.runs {
        s += &format!("{}  d={} k={} {} M={}  status {}\n", c.dir.display(), c.d, c.k, c.initial_data, c.nodes, c.status);
        if let (Some(q), Some(p), Some(f)) = (&c.quantity, &c.predicted, &c.fitted) {
            let (pv, fv) = if q == "beta" { (p.beta, f.beta) } else { (p.c, f.c) };
            s += &format!(
                "  {q}: predicted {}  fitted {}  relative error {}  ratio {}\n",
                opt(pv),
                opt(fv),
                opt(c.relative_error),
                opt(c.ratio)
            );
        }
        for o in &c.overlay {
            s += &format!("  overlay snapshot {:>3}  s = {:.4}  eps = {:.3e}  sup|f − f_N| = {:.3e}\n", o.snapshot, o.s, o.epsilon, o.sup_distance);
        }
    }
    for a in &r.c_agreement {
        s += &format!("C agreement d={} k={}: {:?}  relative spread {:.3e}\n", a.d, a.k, a.values, a.relative_spread);
    }
    s
}

fn run(cli: Cli) -> CliResult<bool> {
    let root = out_root(cli.out.as_deref());
    let json = cli.json;
    match cli.command {
        Command::Predict { d, k, n } => {
            let r = predict::predict_report(d, k, n)?;
            emit(json, &r, || predict::render(&r))?;
            Ok(true)
        }
        Command::Simulate(args) => {
            let configs = args.configs()?;
            let results = if configs.len() == 1 {
                vec![simulate::simulate(&configs[0], &root)]
            } else {
                simulate::sweep(&configs, &root, args.jobs)?
            };
            let mut ok = true;
            let mut reports = Vec::new();
            for r in results {
                match r {
                    Ok(rep) => {
                        ok &= rep.succeeded();
                        reports.push(rep);
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        ok = false;
                    }
                }
            }
            emit(json, &reports, || reports.iter().map(render_sim).collect())?;
            Ok(ok)
        }
        Command::Fit { run_dir, kind, p, decades, efolds } => {
            let spec = kind.map(|k| {
                let base = match k {
                    Kind::Power => FitSpec::power(),
                    Kind::Log => FitSpec::log(p),
                };
                FitSpec { decades, efolds, ..base }
            });
            let f = simulate::fit_run(&run_dir, spec)?;
            emit(json, &f, || {
                let what = if f.kind == FitKind::PowerFit { format!("beta = {} ± {}", opt(f.beta), opt(f.beta_uncertainty)) } else { format!("C = {} ± {}  s0 = {}", opt(f.c), opt(f.c_uncertainty), opt(f.s0)) };
                format!("{:?}: T = {:.12}  {what}  R² = {:.7}\n", f.kind, f.t_blowup, f.r_squared)
            })?;
            Ok(true)
        }
        Command::Compare { run_dirs } => {
            let r = compare::compare_runs(&run_dirs, &root)?;
            emit(json, &r, || render_compare(&r))?;
            Ok(r.succeeded())
        }
        Command::ProfileDump { d, k } => {
            let r = dump::profile_dump(d, k, &root)?;
            emit(json, &r, || format!("{}\n  h = {:.10}  Cs = {:.10}\n", r.dir.display(), r.summary.h, r.summary.cs))?;
            Ok(true)
        }
        Command::BasisDump { d, k, max_n, y_max, samples } => {
            let r = dump::basis_dump(d, k, max_n, y_max, samples, &root)?;
            emit(json, &r, || format!("{}\n  orthonormality residual {:.3e}\n", r.dir.display(), r.orthonormality_residual))?;
            Ok(true)
        }
        Command::Verify { dir } => {
            let bad = manifest::verify(Path::new(&dir))?;
            emit(json, &bad, || if bad.is_empty() { "all artifacts match\n".into() } else { bad.iter().map(|b| format!("mismatch: {b}\n")).collect() })?;
            Ok(bad.is_empty())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
