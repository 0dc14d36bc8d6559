//! Command-line front end.
//!
//! Exit status: 0 success, 1 usage error, 2 I/O error, 3 numeric failure.
//! Diagnostics go to standard error; tables and counts to standard output.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{compare, edge_count, edge_map, parse_methods, sobel_magnitude, Method};
use crate::baselines::TvFilterConfig;
use crate::error::{Error, Result};
use crate::image::downsample_block;
use crate::pgm::{load_pgm, save_pgm, Depth};
use crate::pipeline::{InitMethod, SrConfig};
use crate::solver::{estimate_weights, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "varsr", version, about = "Single-image super-resolution with variationally estimated neighbor weights")]
pub struct Cli {
    /// Worker threads (0 = all cores). Does not change any output.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enlarge a PGM image.
    Upscale(UpscaleArgs),
    /// Estimate the neighbor-weight field of a PGM image and dump it (VWF1).
    Weights(WeightsArgs),
    /// Downsample a reference, reconstruct it with several methods and score them.
    Compare(CompareArgs),
    /// Block-average downsampling.
    Downsample(DownsampleArgs),
    /// Binary Sobel edge map; prints the edge count.
    Sobel(SobelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ours,
    Bicubic,
    Bilinear,
    Nearest,
    Tv,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ours => Method::Ours,
            MethodArg::Bicubic => Method::Bicubic,
            MethodArg::Bilinear => Method::Bilinear,
            MethodArg::Nearest => Method::Nearest,
            MethodArg::Tv => Method::Tv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Nearest,
    Bilinear,
    Bicubic,
}

impl From<InitArg> for InitMethod {
    fn from(m: InitArg) -> Self {
        match m {
            InitArg::Nearest => InitMethod::Nearest,
            InitArg::Bilinear => InitMethod::Bilinear,
            InitArg::Bicubic => InitMethod::Bicubic,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Fidelity weight of the weight solver
    #[arg(long, default_value_t = SolverConfig::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Time step of the weight flow
    #[arg(long, default_value_t = SolverConfig::DEFAULT_DT)]
    pub dt: f64,
    /// TV regularization floor
    #[arg(long, default_value_t = SolverConfig::DEFAULT_EPS)]
    pub eps: f64,
    /// Maximum solver iterations
    #[arg(long, default_value_t = SolverConfig::DEFAULT_MAX_ITERS)]
    pub iters: usize,
    /// Stop when the largest weight update falls below this
    #[arg(long, default_value_t = SolverConfig::DEFAULT_STOP_TOL)]
    pub tol: f64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            dt: self.dt,
            eps: self.eps,
            max_iters: self.iters,
            stop_tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SrArgs {
    /// Initial high-resolution estimate
    #[arg(long, value_enum, default_value_t = InitArg::Nearest)]
    pub init: InitArg,
    /// Rescale the weights to sum to one at every pixel
    #[arg(long)]
    pub renormalize: bool,
    /// Weight sums below this reset to uniform when renormalizing
    #[arg(long, default_value_t = SrConfig::DEFAULT_RENORM_FLOOR)]
    pub renorm_floor: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TvArgs {
    /// Digital TV filter: fitting weight toward the original
    #[arg(long, default_value_t = TvFilterConfig::DEFAULT_LAMBDA_FIT)]
    pub tv_lambda: f64,
    /// Digital TV filter: gradient regularization
    #[arg(long, default_value_t = TvFilterConfig::DEFAULT_EPS)]
    pub tv_eps: f64,
    /// Digital TV filter: maximum iterations
    #[arg(long, default_value_t = TvFilterConfig::DEFAULT_MAX_ITERS)]
    pub tv_iters: usize,
    /// Digital TV filter: stop when the largest pixel update falls below this
    #[arg(long, default_value_t = TvFilterConfig::DEFAULT_STOP_TOL)]
    pub tv_tol: f64,
}

impl TvArgs {
    fn config(&self) -> TvFilterConfig {
        TvFilterConfig {
            lambda_fit: self.tv_lambda,
            eps: self.tv_eps,
            max_iters: self.tv_iters,
            stop_tol: self.tv_tol,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct UpscaleArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Ours)]
    pub method: MethodArg,
    /// Magnification factor
    #[arg(long, default_value_t = SrConfig::DEFAULT_ZOOM)]
    pub zoom: usize,
    /// Output maxval (255 or 65535)
    #[arg(long, default_value_t = 255)]
    pub maxval: u32,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub sr: SrArgs,
    #[command(flatten)]
    pub tv: TvArgs,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, default_value_t = SrConfig::DEFAULT_ZOOM)]
    pub zoom: usize,
    /// Comma-separated subset of ours,bicubic,bilinear,nearest,tv
    #[arg(long, default_value = "ours,bicubic,tv")]
    pub methods: String,
    /// Sobel magnitude threshold shared by all methods
    #[arg(long, default_value_t = crate::analysis::DEFAULT_SOBEL_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub sr: SrArgs,
    #[command(flatten)]
    pub tv: TvArgs,
    pub reference: PathBuf,
    pub report: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DownsampleArgs {
    #[arg(long, default_value_t = SrConfig::DEFAULT_ZOOM)]
    pub zoom: usize,
    #[arg(long, default_value_t = 255)]
    pub maxval: u32,
    pub input: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SobelArgs {
    #[arg(long, default_value_t = crate::analysis::DEFAULT_SOBEL_THRESHOLD)]
    pub threshold: f64,
    pub input: PathBuf,
    pub output: PathBuf,
}

fn sr_config(zoom: usize, solver: &SolverArgs, sr: &SrArgs) -> SrConfig {
    SrConfig {
        zoom,
        solver: solver.config(),
        init_method: sr.init.into(),
        renormalize_weights: sr.renormalize,
        renorm_floor: sr.renorm_floor,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Upscale(a) => {
            let depth = Depth::from_maxval(a.maxval)?;
            let cfg = sr_config(a.zoom, &a.solver, &a.sr);
            cfg.validate()?;
            a.tv.config().validate()?;
            let lr = load_pgm(&a.input)?;
            let out = match Method::from(a.method) {
                Method::Ours => {
                    let res = crate::pipeline::super_resolve(&lr, &cfg)?;
                    eprintln!("iters_run={} final_energy={:.12e}", res.iters_run, res.final_energy);
                    res.image
                }
                m => m.run(&lr, &cfg, &a.tv.config())?,
            };
            save_pgm(&out, &a.output, depth)
        }
        Command::Weights(a) => {
            let cfg = a.solver.config();
            cfg.validate()?;
            let img = load_pgm(&a.input)?;
            let est = estimate_weights(&img, &cfg)?;
            eprintln!("iters_run={} final_energy={:.12e}", est.iters_run, est.final_energy);
            est.weights.save(&a.output)
        }
        Command::Compare(a) => {
            let methods = parse_methods(&a.methods)?;
            let cfg = sr_config(a.zoom, &a.solver, &a.sr);
            cfg.validate()?;
            let tv = a.tv.config();
            tv.validate()?;
            let hr = load_pgm(&a.reference)?;
            let name = a
                .reference
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| a.reference.display().to_string());
            let report = compare(&name, &hr, &methods, a.threshold, &cfg, &tv)?;
            write_text(&a.report, &report.to_records())?;
            print!("{}", report.to_table());
            Ok(())
        }
        Command::Downsample(a) => {
            let depth = Depth::from_maxval(a.maxval)?;
            let img = load_pgm(&a.input)?;
            save_pgm(&downsample_block(&img, a.zoom)?, &a.output, depth)
        }
        Command::Sobel(a) => {
            if !(a.threshold >= 0.0) {
                return Err(Error::InvalidConfig("threshold must be >= 0".into()));
            }
            let img = load_pgm(&a.input)?;
            let count = edge_count(&sobel_magnitude(&img), a.threshold);
            save_pgm(&edge_map(&img, a.threshold), &a.output, Depth::Eight)?;
            println!("{count}");
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
