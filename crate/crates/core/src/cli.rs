//! Command-line front end: subcommand dispatch and artifact output.
//!
//! All files are written by this front-end thread; inner modules only return
//! data. Exit codes: 0 success, 2 verification FAIL, 1 any other error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::affinity::affinity_estimate;
use crate::attractor::{
    default_anchor, homogeneous_points, inhomogeneous_points, rasterize,
};
use crate::boxdim::{curve_from_points, estimate_dims};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geom::Pt;
use crate::io::{write_curve_csv, write_pgm, write_points_csv, write_report};
use crate::verify::{
    cosc_check_rect, kappa_condition, projection_measure_min, verify_sandwich, VerifyOpts,
};

#[derive(Parser)]
#[command(name = "selfaffine", version, about = "Affine IFS attractors, box dimensions and bound checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the affinity dimension from pressure-equation roots.
    Affinity {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate attractor points and a raster image.
    Attract {
        config: PathBuf,
        /// which set to generate
        #[arg(long, value_enum, default_value = "fc")]
        target: SetTarget,
        #[command(flatten)]
        common: Common,
    },
    /// Box-count a set over dyadic scales and fit dimension estimates.
    Boxdim {
        config: PathBuf,
        /// which set to count
        #[arg(long, value_enum)]
        target: SetTarget,
        #[command(flatten)]
        common: Common,
    },
    /// Run bound and condition checks; exits 2 when a check fails.
    Verify {
        config: PathBuf,
        /// dimension sandwich check
        #[arg(long)]
        sandwich: bool,
        /// condensation open set condition on the configured rectangle
        #[arg(long)]
        cosc: bool,
        /// covering-ratio floor over stopping words
        #[arg(long)]
        kappa: bool,
        /// minimal projection measure over an angle sweep
        #[arg(long)]
        projection: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Render the inhomogeneous attractor as a PGM at delta = 2^-jmax.
    Render {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum SetTarget {
    /// condensation set C
    C,
    /// homogeneous attractor
    F0,
    /// inhomogeneous attractor
    Fc,
}

#[derive(Args)]
struct Common {
    /// finest dyadic scale 2^-jmax
    #[arg(long)]
    jmax: Option<u32>,
    /// cap on tree-node visits
    #[arg(long)]
    budget: Option<u64>,
    /// slack for pass/fail bound checks
    #[arg(long)]
    tol: Option<f64>,
    /// output directory (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// seed recorded for reproducibility
    #[arg(long)]
    seed: Option<u64>,
    /// number of directions for the projection sweep
    #[arg(long)]
    angles: Option<usize>,
    /// slope-fit window as jlo:jhi
    #[arg(long, value_parser = parse_window_flag)]
    window: Option<(u32, u32)>,
    /// worker threads for generation
    #[arg(long)]
    workers: Option<usize>,
    /// deepest pressure-equation level
    #[arg(long)]
    kmax: Option<u32>,
}

fn parse_window_flag(s: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected jlo:jhi, got '{s}'"))?;
    let lo: u32 = lo.trim().parse().map_err(|_| format!("bad jlo '{lo}'"))?;
    let hi: u32 = hi.trim().parse().map_err(|_| format!("bad jhi '{hi}'"))?;
    Ok((lo, hi))
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(j) = self.jmax {
            cfg.j_max = j;
            cfg.j_min = cfg.j_min.min(j.saturating_sub(1)).max(1);
        }
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(a) = self.angles {
            cfg.angles = a;
        }
        if let Some(w) = self.window {
            cfg.window = Some(w);
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(k) = self.kmax {
            cfg.k_max = k;
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load(config: &Path, common: &Common) -> Result<RunConfig> {
    let text = fs::read_to_string(config)?;
    let mut cfg = RunConfig::parse(&text)?;
    common.apply(&mut cfg);
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn target_points(cfg: &RunConfig, target: SetTarget, delta: f64) -> Result<(Vec<Pt>, crate::ifs::System)> {
    let sys = cfg.build_system()?.normalized()?;
    let anchor = default_anchor(&sys)?;
    let pts = match target {
        SetTarget::C => sys.condensation.discretize(delta)?,
        SetTarget::F0 => homogeneous_points(&sys, delta, anchor, cfg.budget, cfg.workers)?,
        SetTarget::Fc => inhomogeneous_points(&sys, delta, anchor, cfg.budget, cfg.workers)?,
    };
    Ok((pts, sys))
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Affinity { config, common } => {
            let cfg = load(&config, &common)?;
            let sys = cfg.build_system()?;
            let est = affinity_estimate(&sys.ifs, cfg.k_max, cfg.budget)?;
            let mut entries: Vec<(&str, String)> = vec![("seed", cfg.seed.to_string())];
            let sk_lines: Vec<String> =
                est.sequence.iter().map(|(k, s)| format!("s_{k} = {s:.9}")).collect();
            let mut report = Vec::new();
            write_report(&mut report, &entries)?;
            report.extend(sk_lines.join("\n").into_bytes());
            report.push(b'\n');
            entries = vec![
                ("s_upper", format!("{:.9}", est.upper)),
                (
                    "s_extrapolated",
                    est.extrapolated.map(|v| format!("{v:.9}")).unwrap_or_else(|| "n/a".into()),
                ),
                (
                    "convergence",
                    est.convergence.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "n/a".into()),
                ),
            ];
            write_report(&mut report, &entries)?;
            write_file(&common.out_dir(), "report.txt", &report)?;
            println!("{:.6}", est.upper);
            Ok(0)
        }
        Cmd::Attract { config, target, common } => {
            let cfg = load(&config, &common)?;
            let delta = 2f64.powi(-(cfg.j_max as i32));
            let (pts, sys) = target_points(&cfg, target, delta)?;
            let grid = rasterize(&pts, delta, &sys.ball)?;
            let mut csv = Vec::new();
            write_points_csv(&mut csv, &pts, sys.dim())?;
            let mut pgm = Vec::new();
            write_pgm(&mut pgm, &grid, &sys.ball)?;
            let dir = common.out_dir();
            write_file(&dir, "points.csv", &csv)?;
            write_file(&dir, "attractor.pgm", &pgm)?;
            println!("{} points, {} occupied cells", pts.len(), grid.count());
            Ok(0)
        }
        Cmd::Boxdim { config, target, common } => {
            let cfg = load(&config, &common)?;
            let delta = 2f64.powi(-(cfg.j_max as i32));
            let (pts, sys) = target_points(&cfg, target, delta)?;
            let curve = curve_from_points(&pts, &sys.ball, (cfg.j_min, cfg.j_max))?;
            let est = estimate_dims(&curve, cfg.window)?;
            let mut csv = Vec::new();
            write_curve_csv(&mut csv, &curve)?;
            let mut report = Vec::new();
            write_report(
                &mut report,
                &[
                    ("target", format!("{target:?}")),
                    ("ols_slope", format!("{:.6}", est.ols_slope)),
                    ("upper_proxy", format!("{:.6}", est.upper_proxy)),
                    ("lower_proxy", format!("{:.6}", est.lower_proxy)),
                    ("window", format!("{}:{}", est.window.0, est.window.1)),
                ],
            )?;
            let dir = common.out_dir();
            write_file(&dir, "curve.csv", &csv)?;
            write_file(&dir, "report.txt", &report)?;
            println!("{:.6}", est.ols_slope);
            Ok(0)
        }
        Cmd::Verify { config, sandwich, cosc, kappa, projection, common } => {
            if !(sandwich || cosc || kappa || projection) {
                return Err(Error::Domain(
                    "select at least one of --sandwich --cosc --kappa --projection".into(),
                ));
            }
            let cfg = load(&config, &common)?;
            let sys = cfg.build_system()?;
            let mut entries: Vec<(&str, String)> = Vec::new();
            let mut failed = false;

            if sandwich {
                let opts = VerifyOpts {
                    j_range: (cfg.j_min, cfg.j_max),
                    window: cfg.window,
                    tol: cfg.tol,
                    k_max: cfg.k_max,
                    budget: cfg.budget,
                    workers: cfg.workers,
                };
                let r = verify_sandwich(&sys, &opts)?;
                let ok = r.lower_bound_ok && r.upper_bound_ok;
                failed |= !ok;
                entries.push(("dim_c", format!("{:.6}", r.dim_c.ols_slope)));
                entries.push(("dim_f0", format!("{:.6}", r.dim_f0.ols_slope)));
                entries.push(("dim_fc", format!("{:.6}", r.dim_fc.ols_slope)));
                entries.push(("s_upper", format!("{:.6}", r.s_upper)));
                entries.push(("tol", format!("{}", r.slack)));
                entries.push(("lower_bound_ok", r.lower_bound_ok.to_string()));
                entries.push(("upper_bound_ok", r.upper_bound_ok.to_string()));
                println!("sandwich: {}", if ok { "PASS" } else { "FAIL" });
            }
            if cosc {
                let rect = cfg.rect.as_ref().ok_or_else(|| Error::Semantic {
                    path: "run.rect".into(),
                    msg: "--cosc requires 'rect = (lox, loy) (hix, hiy)' in [run]".into(),
                })?;
                let r = cosc_check_rect(&sys.ifs, &sys.condensation, rect)?;
                failed |= !r.ok;
                entries.push(("cosc_ok", r.ok.to_string()));
                entries.push((
                    "cosc_detail",
                    match (&r.violation, r.eta) {
                        (Some(v), _) => format!("{v:?}"),
                        (None, Some(eta)) => format!("eta = {eta:.6}"),
                        (None, None) => "n/a".into(),
                    },
                ));
                println!("cosc: {}", if r.ok { "PASS" } else { "FAIL" });
            }
            if kappa {
                let deltas: Vec<f64> =
                    (cfg.j_min..=cfg.j_max).map(|j| 2f64.powi(-(j as i32))).collect();
                let r = kappa_condition(&sys, &deltas, cfg.budget)?;
                for (d, ratio) in &r.per_delta {
                    entries.push(("kappa_delta", format!("{d:.6e} {ratio:.6}")));
                }
                entries.push(("kappa_floor", format!("{:.6}", r.kappa_floor)));
                println!("kappa floor: {:.6}", r.kappa_floor);
            }
            if projection {
                let r = projection_measure_min(&sys.condensation, cfg.angles)?;
                entries.push(("projection_min", format!("{:.6}", r.min_measure)));
                println!("projection min: {:.6}", r.min_measure);
            }

            let mut report = Vec::new();
            write_report(&mut report, &entries)?;
            write_file(&common.out_dir(), "report.txt", &report)?;
            Ok(if failed { 2 } else { 0 })
        }
        Cmd::Render { config, common } => {
            let cfg = load(&config, &common)?;
            let delta = 2f64.powi(-(cfg.j_max as i32));
            let (pts, sys) = target_points(&cfg, SetTarget::Fc, delta)?;
            let grid = rasterize(&pts, delta, &sys.ball)?;
            let mut pgm = Vec::new();
            write_pgm(&mut pgm, &grid, &sys.ball)?;
            write_file(&common.out_dir(), "render.pgm", &pgm)?;
            println!("{} occupied cells", grid.count());
            Ok(0)
        }
    }
}
