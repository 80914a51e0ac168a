//! Command-line front end.
//!
//! Every option can also come from `--config file.json`, an object keyed by
//! the long option names (`{"kernel": "k.json", "kmax": 8}`); flags win over
//! the file. Kernel, filter, curve and relation options accept a path, an
//! inline JSON object inside the config, or one of the built-in names
//! `builtin:one`, `builtin:compass`, `builtin:delta`.
//!
//! Each run writes its outputs and a `manifest.json` into `--out`.
//! Exit status: 0 if everything requested passed, 1 if a check failed,
//! 2 on error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{
    random_walk_recursion_check, rank_one_eliminate, verify_curve, BivariatePolynomial, SfInput, CURVE_TOL,
};
use crate::colorsolve::{density_moment, density_profile_with, ColorSolver, DEFAULT_EPS};
use crate::combinat::{moments_by_enumeration, moments_by_enumeration_exact, TreeIntegralMode};
use crate::error::{Error, Result};
use crate::exact::format_rational;
use crate::kernel::{kernel_from_filter, parse_kernel_json, validate_kernel, Filter, Kernel, KernelSource};
use crate::matrixlab::{esd_statistics, simulate_colored, simulate_filtered, BinRule, EntryLaw, EsdStatistics, SampleConfig};
use crate::moments::{theoretical_moments, theoretical_moments_exact};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "filtered-spectra", version, about = "Limiting spectra of filtered Wigner band matrices")]
pub struct Cli {
    /// JSON object with default values for the options below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (the FS_THREADS environment variable takes precedence).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Limit moments m_1..m_kmax.
    Moments(MomentsArgs),
    /// Density by Stieltjes inversion on a grid.
    Density(DensityArgs),
    /// Stieltjes transform at one point.
    Solve(SolveArgs),
    /// Monte Carlo spectra.
    Simulate(SimulateArgs),
    /// Rank-one elimination of w, certified against the solver.
    Eliminate(EliminateArgs),
    /// Residual of a curve F(lambda, S(lambda)) = 0.
    Verify(VerifyArgs),
    /// Moments from recursion, density and simulation side by side.
    Crosscheck(CrosscheckArgs),
    /// Random-walk recursion check.
    Walkcheck(WalkcheckArgs),
}

#[derive(Args, Debug, Default)]
pub struct MomentsArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Sum tree integrals over Wigner partitions instead of the recursion.
    #[arg(long)]
    pub oracle: bool,
    /// Exact rational output.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Args, Debug, Default)]
pub struct DensityArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub eps2: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct SolveArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    /// `re,im`
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    /// Filter for the filtered Wigner model.
    #[arg(long)]
    pub filter: Option<String>,
    /// Kernel for the colored Gaussian model (used when no filter is given).
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// gaussian | rademacher
    #[arg(long)]
    pub law: Option<String>,
    /// Histogram bins (Freedman-Diaconis if absent).
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct EliminateArgs {
    /// `{"relation": {...}}` or `{"rational": {...}}`, optionally with `"kernel"`.
    #[arg(long)]
    pub relation: Option<String>,
    #[arg(long)]
    pub kernel: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long)]
    pub kernel: Option<String>,
    /// Sample points on the circle |lambda| = radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Explicit sample points `re,im;re,im;...` (overrides the circle).
    #[arg(long, allow_hyphen_values = true)]
    pub lambdas: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct CrosscheckArgs {
    #[arg(long)]
    pub kernel: Option<String>,
    /// Filter for the simulation leg; the colored model of the kernel is used otherwise.
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Density grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// `filtered` or `colored`. Defaults to `filtered` when a filter is available
    /// (from `--filter` or a filter-typed kernel document), `colored` otherwise.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct WalkcheckArgs {
    /// `re,im;re,im;...`, length 2*ell+1.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long)]
    pub t_max: Option<usize>,
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Resolved option values: flags first, then the config object.
struct Opts {
    config: Map<String, Value>,
    base: PathBuf,
}

impl Opts {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Opts {
                config: Map::new(),
                base: PathBuf::from("."),
            }),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let v: Value = serde_json::from_str(&text)?;
                let config = v
                    .as_object()
                    .cloned()
                    .ok_or_else(|| Error::Parse("config must be a JSON object".into()))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
                Ok(Opts { config, base })
            }
        }
    }

    fn get<T: serde::de::DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::Parse(format!("config key {key:?}: {e}"))),
        }
    }

    fn or<T: serde::de::DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    /// A JSON document given as a flag path, a config path, or an inline config object.
    fn document(&self, flag: Option<&String>, key: &str) -> Result<Option<Value>> {
        if let Some(s) = flag {
            return load_document(s, Path::new(".")).map(Some);
        }
        match self.config.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => load_document(s, &self.base).map(Some),
            Some(v @ Value::Object(_)) => Ok(Some(v.clone())),
            Some(v) => Err(Error::Parse(format!("config key {key:?} must be a path or an object, got {v}"))),
        }
    }

    fn required_document(&self, flag: Option<&String>, key: &str) -> Result<Value> {
        self.document(flag, key)?
            .ok_or_else(|| Error::InvalidInput(format!("--{key} is required")))
    }
}

fn load_document(s: &str, base: &Path) -> Result<Value> {
    if let Some(name) = s.strip_prefix("builtin:") {
        return match name {
            "one" => Ok(Kernel::constant_one().to_json()),
            "compass" => Ok(Filter::compass().to_json()),
            "delta" => Ok(Filter::delta().to_json()),
            other => Err(Error::InvalidInput(format!("unknown built-in {other:?}"))),
        };
    }
    let p = Path::new(s);
    let p = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let text = fs::read_to_string(&p)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", p.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn kernel_of(doc: &Value) -> Result<Kernel> {
    parse_kernel_json(doc)?.kernel()
}

fn filter_of(doc: &Value) -> Result<Filter> {
    match parse_kernel_json(doc)? {
        KernelSource::Filter(h) => Ok(h),
        KernelSource::Kernel(_) => Err(Error::InvalidInput(
            "a filter document (\"type\":\"filter\") is required here".into(),
        )),
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number {t:?} in {s:?}")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Error::Parse(format!("expected re,im, got {s:?}"))),
    }
}

fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_complex).collect()
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Run {
    command: &'static str,
    out: PathBuf,
    outputs: Vec<(String, String)>,
    start: Instant,
    seed: Option<u64>,
    resolved: Map<String, Value>,
}

impl Run {
    fn new(command: &'static str, out: PathBuf, seed: Option<u64>) -> Result<Self> {
        fs::create_dir_all(&out)?;
        Ok(Run {
            command,
            out,
            outputs: vec![],
            start: Instant::now(),
            seed,
            resolved: Map::new(),
        })
    }

    fn record(&mut self, key: &str, v: impl Serialize) {
        self.resolved
            .insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.out.join(name), contents)?;
        self.outputs.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    fn finish(self) -> Result<()> {
        let config_text = serde_json::to_string(&Value::Object(self.resolved.clone()))?;
        let manifest = json!({
            "command": self.command,
            "config": Value::Object(self.resolved),
            "config_sha256": sha256_hex(config_text.as_bytes()),
            "seed": self.seed,
            "version": VERSION,
            "wall_time_s": self.start.elapsed().as_secs_f64(),
            "outputs": self.outputs.iter().map(|(f, h)| json!({"file": f, "sha256": h})).collect::<Vec<_>>(),
        });
        fs::write(self.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }
}

fn configure_threads(flag: Option<usize>) {
    let env = std::env::var("FS_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(n) = env.or(flag).filter(|&n| n > 0) {
        // the global pool can only be built once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let opts = Opts::load(cli.config.as_deref())?;
    configure_threads(opts.get(cli.threads, "threads")?);
    let out = opts.or(cli.out.clone(), "out", PathBuf::from("fs-out"))?;
    let seed = opts.get(cli.seed, "seed")?;
    match &cli.command {
        Command::Moments(a) => cmd_moments(&opts, a, Run::new("moments", out, seed)?),
        Command::Density(a) => cmd_density(&opts, a, Run::new("density", out, seed)?),
        Command::Solve(a) => cmd_solve(&opts, a, Run::new("solve", out, seed)?),
        Command::Simulate(a) => cmd_simulate(&opts, a, seed.unwrap_or(42), Run::new("simulate", out, Some(seed.unwrap_or(42)))?),
        Command::Eliminate(a) => cmd_eliminate(&opts, a, Run::new("eliminate", out, seed)?),
        Command::Verify(a) => cmd_verify(&opts, a, Run::new("verify", out, seed)?),
        Command::Crosscheck(a) => cmd_crosscheck(&opts, a, seed.unwrap_or(42), Run::new("crosscheck", out, Some(seed.unwrap_or(42)))?),
        Command::Walkcheck(a) => cmd_walkcheck(&opts, a, Run::new("walkcheck", out, seed)?),
    }
}

fn cmd_moments(opts: &Opts, a: &MomentsArgs, mut run: Run) -> Result<bool> {
    let doc = opts.required_document(a.kernel.as_ref(), "kernel")?;
    let k = kernel_of(&doc)?;
    validate_kernel(&k).into_result()?;
    let kmax = opts.or(a.kmax, "kmax", 8)?;
    let oracle = a.oracle || opts.or(None, "oracle", false)?;
    let exact = a.exact || opts.or(None, "exact", false)?;
    run.record("kernel", &doc);
    run.record("kmax", kmax);
    run.record("oracle", oracle);
    run.record("exact", exact);
    let mut csv = String::from("k,value\n");
    if exact {
        let m = if oracle {
            moments_by_enumeration_exact(&k, kmax)?
        } else {
            theoretical_moments_exact(&k, kmax)?
        };
        for (i, v) in m.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", i + 1, format_rational(v)));
        }
    } else {
        let m = if oracle {
            let mode = if k.is_pure_fourier() {
                TreeIntegralMode::FourierLattice
            } else {
                TreeIntegralMode::Quadrature
            };
            moments_by_enumeration(&k, kmax, mode)?
        } else {
            theoretical_moments(&k, kmax)?
        };
        for (i, v) in m.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", i + 1, fmt_f64(*v)));
        }
    }
    run.write("moments.csv", &csv)?;
    print!("{csv}");
    run.finish()?;
    Ok(true)
}

fn cmd_density(opts: &Opts, a: &DensityArgs, mut run: Run) -> Result<bool> {
    let doc = opts.required_document(a.kernel.as_ref(), "kernel")?;
    let k = kernel_of(&doc)?;
    validate_kernel(&k).into_result()?;
    let solver = ColorSolver::new(&k);
    let reach = solver.a_bound().max(0.5);
    let xmin = opts.or(a.xmin, "xmin", -reach)?;
    let xmax = opts.or(a.xmax, "xmax", reach)?;
    let n = opts.or(a.n, "n", 401)?;
    let eps1 = opts.or(a.eps1, "eps1", DEFAULT_EPS.0)?;
    let eps2 = opts.or(a.eps2, "eps2", DEFAULT_EPS.1)?;
    if n < 2 || !(xmax > xmin) {
        return Err(Error::InvalidInput("need n >= 2 and xmax > xmin".into()));
    }
    for (key, v) in [("xmin", json!(xmin)), ("xmax", json!(xmax)), ("n", json!(n)), ("eps1", json!(eps1)), ("eps2", json!(eps2))] {
        run.record(key, v);
    }
    run.record("kernel", &doc);
    let xs: Vec<f64> = (0..n).map(|i| xmin + (xmax - xmin) * i as f64 / (n - 1) as f64).collect();
    let grid = density_profile_with(&solver, &xs, (eps1, eps2))?;
    let mut csv = String::from("x,density,residual_flag\n");
    for ((x, d), f) in grid.xs.iter().zip(&grid.density).zip(&grid.failed) {
        csv.push_str(&format!("{},{},{}\n", fmt_f64(*x), fmt_f64(*d), u8::from(*f)));
    }
    run.write("density.csv", &csv)?;
    let summary = json!({
        "support_estimate": grid.support_estimate.map(|(lo, hi)| vec![lo, hi]),
        "failed_points": grid.failed.iter().filter(|f| **f).count(),
        "epsilon": [eps1, eps2],
    });
    run.write("summary.json", &serde_json::to_string_pretty(&summary)?)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    let ok = grid.failed.iter().all(|f| !f);
    run.finish()?;
    Ok(ok)
}

fn cmd_solve(opts: &Opts, a: &SolveArgs, mut run: Run) -> Result<bool> {
    let doc = opts.required_document(a.kernel.as_ref(), "kernel")?;
    let k = kernel_of(&doc)?;
    validate_kernel(&k).into_result()?;
    let lambda_s: String = opts
        .get(a.lambda.clone(), "lambda")?
        .ok_or_else(|| Error::InvalidInput("--lambda re,im is required".into()))?;
    let lambda = parse_complex(&lambda_s)?;
    run.record("kernel", &doc);
    run.record("lambda", &lambda_s);
    let sol = ColorSolver::new(&k).solve_anywhere(lambda)?;
    let csv = format!(
        "lambda_re,lambda_im,s_re,s_im,residual,nodes\n{},{},{},{},{},{}\n",
        fmt_f64(lambda.re),
        fmt_f64(lambda.im),
        fmt_f64(sol.stieltjes.re),
        fmt_f64(sol.stieltjes.im),
        fmt_f64(sol.residual),
        sol.nodes
    );
    run.write("solve.csv", &csv)?;
    print!("{csv}");
    run.finish()?;
    Ok(true)
}

fn parse_law(s: &str) -> Result<EntryLaw> {
    match s {
        "gaussian" => Ok(EntryLaw::Gaussian),
        "rademacher" => Ok(EntryLaw::Rademacher),
        other => Err(Error::InvalidInput(format!("unknown entry law {other:?}"))),
    }
}

enum Model {
    Filtered(Filter),
    Colored(Kernel),
}

fn simulate_model(model: &Model, cfg: &SampleConfig, kmax: usize, bins: Option<usize>) -> Result<EsdStatistics> {
    let esds = match model {
        Model::Filtered(h) => simulate_filtered(h, cfg, kmax)?,
        Model::Colored(k) => simulate_colored(k, cfg, kmax)?,
    };
    let rule = bins.map_or(BinRule::FreedmanDiaconis, BinRule::Fixed);
    esd_statistics(&esds, kmax, rule)
}

fn cmd_simulate(opts: &Opts, a: &SimulateArgs, seed: u64, mut run: Run) -> Result<bool> {
    let model = if let Some(doc) = opts.document(a.filter.as_ref(), "filter")? {
        run.record("filter", &doc);
        Model::Filtered(filter_of(&doc)?)
    } else if let Some(doc) = opts.document(a.kernel.as_ref(), "kernel")? {
        run.record("kernel", &doc);
        let k = kernel_of(&doc)?;
        validate_kernel(&k).into_result()?;
        Model::Colored(k)
    } else {
        return Err(Error::InvalidInput("--filter or --kernel is required".into()));
    };
    let default_n = if matches!(model, Model::Filtered(_)) { 1000 } else { 40 };
    let n = opts.or(a.n, "N", default_n)?;
    let trials = opts.or(a.trials, "trials", 5)?;
    let kmax = opts.or(a.kmax, "kmax", 6)?;
    let law = parse_law(&opts.or(a.law.clone(), "law", "gaussian".to_string())?)?;
    let bins: Option<usize> = opts.get(a.bins, "bins")?;
    for (key, v) in [("N", json!(n)), ("trials", json!(trials)), ("kmax", json!(kmax)), ("law", json!(format!("{law:?}").to_lowercase())), ("bins", json!(bins))] {
        run.record(key, v);
    }
    let cfg = SampleConfig {
        n,
        seed,
        entry_law: law,
        trials,
    };
    let stats = simulate_model(&model, &cfg, kmax, bins)?;
    let mut csv = String::from("k,mean,stderr\n");
    for m in &stats.moments {
        csv.push_str(&format!("{},{},{}\n", m.k, fmt_f64(m.mean), fmt_f64(m.stderr)));
    }
    run.write("moments.csv", &csv)?;
    let mut hist = String::from("bin_lo,bin_hi,mass\n");
    for (i, m) in stats.histogram.mass.iter().enumerate() {
        hist.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(stats.histogram.edges[i]),
            fmt_f64(stats.histogram.edges[i + 1]),
            fmt_f64(*m)
        ));
    }
    run.write("hist.csv", &hist)?;
    print!("{csv}");
    run.finish()?;
    Ok(true)
}

fn cmd_eliminate(opts: &Opts, a: &EliminateArgs, mut run: Run) -> Result<bool> {
    let rel = opts.required_document(a.relation.as_ref(), "relation")?;
    let sf = SfInput::from_json(&rel)?;
    let kdoc = match opts.document(a.kernel.as_ref(), "kernel")? {
        Some(d) => d,
        None => rel.get("kernel").cloned().ok_or_else(|| {
            Error::InvalidInput("a kernel is required to certify the curve (--kernel or \"kernel\" in the relation file)".into())
        })?,
    };
    run.record("relation", &rel);
    run.record("kernel", &kdoc);
    let k = kernel_of(&kdoc)?;
    let cert = rank_one_eliminate(&sf, &k)?;
    let out = json!({
        "coeffs": cert.curve.to_json()["coeffs"],
        "residual": cert.residual,
        "text": cert.curve.display_with(&["lambda", "S"]).to_string(),
    });
    run.write("curve.json", &serde_json::to_string_pretty(&out)?)?;
    println!("{}", cert.curve.display_with(&["lambda", "S"]));
    println!("residual {:.3e}", cert.residual);
    run.finish()?;
    Ok(true)
}

fn cmd_verify(opts: &Opts, a: &VerifyArgs, mut run: Run) -> Result<bool> {
    let cdoc = opts.required_document(a.curve.as_ref(), "curve")?;
    let kdoc = opts.required_document(a.kernel.as_ref(), "kernel")?;
    let curve = BivariatePolynomial::from_json(&cdoc)?;
    let k = kernel_of(&kdoc)?;
    validate_kernel(&k).into_result()?;
    let lambdas = match opts.get(a.lambdas.clone(), "lambdas")? {
        Some(s) => parse_complex_list(&s)?,
        None => {
            let r = opts.or(a.radius, "radius", 10.0)?;
            let p = opts.or(a.points, "points", 20)?;
            (0..p)
                .map(|j| Complex64::from_polar(r, std::f64::consts::PI * (2.0 * j as f64 + 1.0) / p as f64))
                .collect()
        }
    };
    run.record("curve", &cdoc);
    run.record("kernel", &kdoc);
    run.record("lambdas", lambdas.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
    let residual = verify_curve(&curve, &k, &lambdas)?;
    let pass = residual < CURVE_TOL;
    let report = json!({"residual": residual, "tolerance": CURVE_TOL, "pass": pass});
    run.write("verify.json", &serde_json::to_string_pretty(&report)?)?;
    println!("residual {residual:.3e} ({})", if pass { "pass" } else { "FAIL" });
    run.finish()?;
    Ok(pass)
}

#[derive(Serialize)]
struct CrossRow {
    k: usize,
    recursion: f64,
    density: Option<f64>,
    simulation_mean: f64,
    simulation_stderr: f64,
    density_ok: bool,
    simulation_ok: bool,
}

pub const DENSITY_MOMENT_TOL: f64 = 1e-3;

fn cmd_crosscheck(opts: &Opts, a: &CrosscheckArgs, seed: u64, mut run: Run) -> Result<bool> {
    let kdoc = opts.required_document(a.kernel.as_ref(), "kernel")?;
    let k = kernel_of(&kdoc)?;
    run.record("kernel", &kdoc);
    let kmax = opts.or(a.kmax, "kmax", 6)?;
    let trials = opts.or(a.trials, "trials", 5)?;
    let grid_n = opts.or(a.grid, "grid", 801)?;
    let validation = validate_kernel(&k);
    let filter = match opts.document(a.filter.as_ref(), "filter")? {
        Some(doc) => {
            run.record("filter", &doc);
            Some(filter_of(&doc)?)
        }
        None => match parse_kernel_json(&kdoc)? {
            KernelSource::Filter(h) => Some(h),
            KernelSource::Kernel(_) => None,
        },
    };
    let model_name: Option<String> = opts.get(a.model.clone(), "model")?;
    let model = match (model_name.as_deref(), filter) {
        (None | Some("filtered"), Some(h)) => Model::Filtered(h),
        (Some("filtered"), None) => {
            return Err(Error::InvalidInput("--model filtered needs a filter document".into()))
        }
        (None | Some("colored"), _) => Model::Colored(k.clone()),
        (Some(other), _) => return Err(Error::InvalidInput(format!("unknown model {other:?}"))),
    };
    run.record("model", if matches!(model, Model::Filtered(_)) { "filtered" } else { "colored" });
    let default_n = if matches!(model, Model::Filtered(_)) { 1000 } else { 40 };
    let n = opts.or(a.n, "N", default_n)?;
    for (key, v) in [("kmax", json!(kmax)), ("trials", json!(trials)), ("grid", json!(grid_n)), ("N", json!(n))] {
        run.record(key, v);
    }
    let failures: Vec<String> = validation.failures().iter().map(|c| format!("{}: {}", c.name, c.detail.clone().unwrap_or_default())).collect();

    let recursion = theoretical_moments(&k, kmax)?;
    let density_moments: Option<Vec<f64>> = if validation.is_valid() {
        let solver = ColorSolver::new(&k);
        let reach = solver.a_bound();
        let xs: Vec<f64> = (0..grid_n)
            .map(|i| -reach + 2.0 * reach * i as f64 / (grid_n - 1) as f64)
            .collect();
        let grid = density_profile_with(&solver, &xs, (1e-3, 5e-4))?;
        if grid.failed.iter().any(|f| *f) {
            None
        } else {
            Some((1..=kmax).map(|p| density_moment(&grid, p as u32)).collect())
        }
    } else {
        None
    };
    let cfg = SampleConfig {
        n,
        seed,
        entry_law: EntryLaw::Gaussian,
        trials,
    };
    let stats = simulate_model(&model, &cfg, kmax, None)?;

    let mut rows = Vec::with_capacity(kmax);
    for kk in 1..=kmax {
        let r = recursion[kk - 1];
        let d = density_moments.as_ref().map(|m| m[kk - 1]);
        let s = &stats.moments[kk - 1];
        rows.push(CrossRow {
            k: kk,
            recursion: r,
            density: d,
            simulation_mean: s.mean,
            simulation_stderr: s.stderr,
            density_ok: d.is_some_and(|d| (d - r).abs() <= DENSITY_MOMENT_TOL * r.abs().max(1.0)),
            // odd limit moments vanish identically; their samples are reported, not judged
            simulation_ok: kk % 2 == 1 || (s.mean - r).abs() <= 3.0 * s.stderr,
        });
    }
    let pass = failures.is_empty() && rows.iter().all(|r| r.density_ok && r.simulation_ok);
    let mut table = String::from("k,recursion,density,simulation_mean,simulation_stderr,density_ok,simulation_ok\n");
    for r in &rows {
        table.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.k,
            fmt_f64(r.recursion),
            r.density.map_or("nan".to_string(), fmt_f64),
            fmt_f64(r.simulation_mean),
            fmt_f64(r.simulation_stderr),
            r.density_ok,
            r.simulation_ok
        ));
    }
    let report = json!({
        "pass": pass,
        "kernel_validation_failures": failures,
        "tolerances": {"recursion_vs_density": DENSITY_MOMENT_TOL, "recursion_vs_simulation_stderr": 3.0},
        "rows": rows,
    });
    run.write("crosscheck.csv", &table)?;
    run.write("report.json", &serde_json::to_string_pretty(&report)?)?;
    print!("{table}");
    for f in &failures {
        println!("kernel check failed: {f}");
    }
    println!("{}", if pass { "crosscheck passed" } else { "crosscheck FAILED" });
    run.finish()?;
    Ok(pass)
}

pub const WALK_TOL: f64 = 1e-10;

fn cmd_walkcheck(opts: &Opts, a: &WalkcheckArgs, mut run: Run) -> Result<bool> {
    let z = match a.z.clone() {
        Some(s) => parse_complex_list(&s)?,
        None => match opts.config.get("z") {
            Some(v) => {
                let pairs: Vec<[f64; 2]> = serde_json::from_value(v.clone())
                    .map_err(|e| Error::Parse(format!("config key \"z\": {e}")))?;
                pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect()
            }
            None => return Err(Error::InvalidInput("--z is required".into())),
        },
    };
    let ell = opts.or(a.ell, "ell", z.len().saturating_sub(1) / 2)?;
    let t_max = opts.or(a.t_max, "t_max", 60)?;
    run.record("z", z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>());
    run.record("ell", ell);
    run.record("t_max", t_max);
    let r = random_walk_recursion_check(&z, ell, t_max)?;
    let pass = r.max_residual < WALK_TOL;
    let report = json!({
        "recursion_residual": r.recursion_residual,
        "series_residual": r.series_residual,
        "theta_residual": r.theta_residual,
        "max_residual": r.max_residual,
        "theta": r.theta.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "pass": pass,
    });
    run.write("walkcheck.json", &serde_json::to_string_pretty(&report)?)?;
    println!("max residual {:.3e} ({})", r.max_residual, if pass { "pass" } else { "FAIL" });
    run.finish()?;
    Ok(pass)
}

/// Convenience used by tests and the FFI crate: a kernel from a filter or kernel document string.
pub fn kernel_from_document(text: &str) -> Result<Kernel> {
    let doc: Value = serde_json::from_str(text)?;
    match parse_kernel_json(&doc)? {
        KernelSource::Filter(h) => kernel_from_filter(&h),
        KernelSource::Kernel(k) => Ok(k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("3,0").unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(parse_complex("-1.5, 2").unwrap(), Complex64::new(-1.5, 2.0));
        assert!(parse_complex("a,b").is_err());
        assert_eq!(parse_complex_list("1,0;0,1").unwrap().len(), 2);
    }

    #[test]
    fn float_format_round_trips() {
        for x in [1.0 / 3.0, -2.5406, 1e-300, 12345.678] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn builtins_load() {
        assert!(kernel_of(&load_document("builtin:one", Path::new(".")).unwrap()).is_ok());
        assert!(filter_of(&load_document("builtin:compass", Path::new(".")).unwrap()).is_ok());
        assert!(load_document("builtin:nope", Path::new(".")).is_err());
    }
}
