use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use delaunay_core::curves::{
    assemble_global_with, export_curve, static_torus_curve, ExportFormat, GeneratingCurve, DEFAULT_GRID, MAX_GRID,
    MIN_GRID,
};
use delaunay_core::mesh::{export_obj, mesh, DEFAULT_POLE};
use delaunay_core::oracle::{mean_curvature_fd, profile_samples, PhaseSamples};
use delaunay_core::profile::{classify, profile_interval};
use delaunay_core::rational::best_rational;
use delaunay_core::solver::{flower_closure, solve_closed, solve_flower_beta, sweep};
use delaunay_core::width::{adjusted_width, width};
use delaunay_core::{CmcParams, CriticalConstants, DelaunayType, NormalConvention};

#[derive(Parser, Debug)]
#[command(name = "delaunay", version, about = "Rotational constant mean curvature hypersurfaces in the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Type of the solution and the critical constants.
    Classify,
    /// W, the adjusted width and the error estimate, as JSON.
    Width,
    /// The profile interval, as JSON.
    Domain,
    /// Global generating curve as CSV or JSON.
    Curve,
    /// Surface of revolution (n = 3) as OBJ.
    Mesh,
    /// Solve W(h, C) = target and test the assembled curve.
    Solve,
    /// Table of type, W and adjusted width over the C band.
    Sweep,
    /// Finite-difference mean curvature check; exit 1 on failure.
    Verify,
    /// Flower width and petal count.
    Flower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Obj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Convention {
    Fixed,
    Continuous,
}

/// A numeric value: a number, or text such as `0.5`, `pi`, `-pi/2`, `2pi/k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Value(f64),
    Text(String),
}

#[derive(clap::Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Flags {
    /// Dimension of the ambient sphere S^n.
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Mean curvature.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_num)]
    h: Option<Num>,
    /// Integration constant.
    #[arg(long = "C", global = true, allow_hyphen_values = true, value_parser = parse_num)]
    #[serde(rename = "C")]
    c: Option<Num>,
    /// Target width in radians (the flower angle for `flower`).
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_num)]
    #[serde(alias = "targetW")]
    target_width: Option<Num>,
    #[arg(long, global = true)]
    k: Option<u32>,
    /// Periods of the fundamental piece (petals for the flower).
    #[arg(long, global = true)]
    periods: Option<usize>,
    #[arg(long, global = true)]
    #[serde(alias = "gridSize")]
    grid_size: Option<usize>,
    #[arg(long, global = true)]
    #[serde(alias = "outPath")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Tolerance for `verify`.
    #[arg(long, global = true, value_parser = parse_num)]
    tol: Option<Num>,
    /// Step in s for `verify`.
    #[arg(long, global = true, value_parser = parse_num)]
    ds: Option<Num>,
    /// Stencil width for `verify`: 3 or 5.
    #[arg(long, global = true)]
    stencil: Option<usize>,
    /// Fraction of the profile interval skipped at each end by `verify`.
    #[arg(long, global = true, value_parser = parse_num)]
    margin: Option<Num>,
    #[arg(long, global = true, value_enum)]
    convention: Option<Convention>,
    /// Steps in the rotation angle for `mesh`.
    #[arg(long, global = true)]
    azimuthal: Option<usize>,
    /// Projection pole for `mesh`, four comma-separated components.
    #[arg(long, global = true, value_delimiter = ',', num_args = 4, allow_hyphen_values = true)]
    pole: Option<Vec<f64>>,
    /// Grid points for `sweep`.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Largest denominator in rationality tests.
    #[arg(long, global = true)]
    max_den: Option<u64>,
    /// JSON file with any of the above; flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

fn parse_num(text: &str) -> Result<Num, String> {
    Ok(Num::Text(text.trim().to_string()))
}

/// Evaluates a numeric literal. `k` is only needed for `.../k`.
fn eval_num(num: &Num, k: Option<u32>) -> Result<f64> {
    let text = match num {
        Num::Value(v) => return Ok(*v),
        Num::Text(t) => t.to_ascii_lowercase().replace(' ', ""),
    };
    if let Ok(v) = text.parse::<f64>() {
        if v.is_finite() {
            return Ok(v);
        }
        bail!("not a finite number: {text}");
    }
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, text.strip_prefix('+').unwrap_or(&text)),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (body, None),
    };
    let coef = match num.strip_suffix("pi") {
        Some("") => PI,
        Some(c) => c.trim_end_matches('*').parse::<f64>().map_err(|_| anyhow!("bad numeric literal: {text}"))? * PI,
        None => bail!("bad numeric literal: {text}"),
    };
    let den = match den {
        None => 1.0,
        Some("k") => f64::from(k.ok_or_else(|| anyhow!("{text} needs --k"))?),
        Some(d) => d.parse::<f64>().map_err(|_| anyhow!("bad numeric literal: {text}"))?,
    };
    if den == 0.0 {
        bail!("division by zero in {text}");
    }
    Ok(sign * coef / den)
}

/// Flags merged over the config file, with numbers evaluated.
#[derive(Debug, Clone)]
struct RunConfig {
    command: Command,
    f: Flags,
}

impl RunConfig {
    fn load(cli: Cli) -> Result<Self> {
        let mut f = cli.flags;
        if let Some(path) = f.config.clone() {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let file: Flags = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            macro_rules! fill {
                ($($field:ident),*) => { $( if f.$field.is_none() { f.$field = file.$field; } )* };
            }
            fill!(n, h, c, target_width, k, periods, grid_size, out, format, tol, ds, stencil, margin, convention,
                azimuthal, pole, points, max_den);
        }
        Ok(Self { command: cli.command, f })
    }

    fn num(&self, v: &Option<Num>, name: &str) -> Result<Option<f64>> {
        v.as_ref().map(|x| eval_num(x, self.f.k)).transpose().with_context(|| format!("--{name}"))
    }

    fn need(&self, v: &Option<Num>, name: &str) -> Result<f64> {
        self.num(v, name)?.ok_or_else(|| anyhow!("{} requires --{name}", self.name()))
    }

    fn name(&self) -> String {
        serde_json::to_value(self.command).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }

    fn n(&self) -> Result<u32> {
        self.f.n.ok_or_else(|| anyhow!("{} requires --n", self.name()))
    }

    fn params(&self) -> Result<CmcParams> {
        Ok(CmcParams::new(self.n()?, self.need(&self.f.h, "h")?, self.need(&self.f.c, "C")?)?)
    }

    fn grid_size(&self) -> Result<usize> {
        let g = self.f.grid_size.unwrap_or(DEFAULT_GRID);
        if !(MIN_GRID..=MAX_GRID).contains(&g) {
            bail!("--grid-size must lie in [{MIN_GRID}, {MAX_GRID}], got {g}");
        }
        Ok(g)
    }

    fn periods(&self) -> Result<usize> {
        match self.f.periods {
            Some(0) => bail!("--periods must be at least 1"),
            Some(p) => Ok(p),
            None => Ok(1),
        }
    }

    fn format(&self, default: Format, allowed: &[Format]) -> Result<Format> {
        let fmt = self.f.format.unwrap_or(default);
        if !allowed.contains(&fmt) {
            bail!("{} does not write {:?}", self.name(), fmt);
        }
        Ok(fmt)
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.f.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn json_line<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn build_curve(cfg: &RunConfig) -> Result<GeneratingCurve> {
    let p = cfg.params()?;
    let grid = cfg.grid_size()?;
    let periods = cfg.periods()?;
    Ok(match classify(&p)? {
        DelaunayType::StaticTorus | DelaunayType::NegStaticTorus => static_torus_curve(&p, grid)?,
        _ => assemble_global_with(&p, periods, grid)?,
    })
}

fn run(cfg: &RunConfig) -> Result<ExitCode> {
    log::info!("running {}", cfg.name());
    match cfg.command {
        Command::Classify => {
            let p = cfg.params()?;
            let kind = classify(&p)?;
            let crit = CriticalConstants::new(p.n, p.h);
            emit(
                cfg,
                &format!(
                    "{kind} s0={:.17e} sh={:.17e} sh_neg={:.17e} Ch={:.17e} Ch_neg={:.17e}\n",
                    crit.s0, crit.sh, crit.sh_neg, crit.ch, crit.ch_neg
                ),
            )?;
        }
        Command::Width => {
            let p = cfg.params()?;
            let w = width(&p)?;
            let wt = adjusted_width(p.n, p.h, p.c).ok();
            let out = json!({
                "n": p.n,
                "h": p.h,
                "C": p.c,
                "W": w.w,
                "W_tilde": wt.map(|a| a.w_tilde),
                "branch": wt.map(|a| format!("{:?}", a.branch)),
                "err_est": w.err_est.max(wt.map_or(0.0, |a| a.err_est)),
            });
            emit(cfg, &json_line(&out)?)?;
        }
        Command::Domain => {
            let p = cfg.params()?;
            let iv = profile_interval(&p)?;
            let out = json!({ "params": p, "type": classify(&p)?.to_string(), "interval": iv });
            emit(cfg, &json_line(&out)?)?;
        }
        Command::Curve => {
            let fmt = match cfg.format(Format::Csv, &[Format::Csv, Format::Json])? {
                Format::Json => ExportFormat::Json,
                _ => ExportFormat::Csv,
            };
            let curve = build_curve(cfg)?;
            emit(cfg, &export_curve(&curve.samples, fmt)?)?;
        }
        Command::Mesh => {
            cfg.format(Format::Obj, &[Format::Obj])?;
            let pole = match &cfg.f.pole {
                Some(v) if v.len() == 4 => [v[0], v[1], v[2], v[3]],
                Some(v) => bail!("--pole needs 4 components, got {}", v.len()),
                None => DEFAULT_POLE,
            };
            let curve = build_curve(cfg)?;
            let m = mesh(&curve, cfg.f.azimuthal.unwrap_or(64), pole)?;
            emit(cfg, &export_obj(&curve, &m)?)?;
        }
        Command::Solve => {
            let n = cfg.n()?;
            let h = cfg.need(&cfg.f.h, "h")?;
            let target = match (cfg.num(&cfg.f.target_width, "target-width")?, cfg.f.k) {
                (Some(t), _) => t,
                (None, Some(k)) if k > 0 => 2.0 * PI / f64::from(k),
                _ => bail!("solve requires --target-width or --k"),
            };
            let periods = match cfg.f.periods {
                Some(p) => p as u32,
                None => {
                    let r = best_rational(target / (2.0 * PI), cfg.f.max_den.unwrap_or(1000));
                    if r.p == 0 || (r.value() - target / (2.0 * PI)).abs() > 1e-12 {
                        bail!("target width {target} is not a rational multiple of 2pi; pass --periods");
                    }
                    r.q as u32
                }
            };
            let sol = solve_closed(n, h, target, periods, cfg.grid_size()?)?;
            emit(cfg, &json_line(&sol)?)?;
        }
        Command::Sweep => {
            cfg.format(Format::Csv, &[Format::Csv])?;
            let n = cfg.n()?;
            let h = cfg.need(&cfg.f.h, "h")?;
            let rows = sweep(n, h, cfg.f.points.unwrap_or(101))?;
            let mut text = String::from("C,type,W,W_tilde,err_est\n");
            let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
            for r in rows {
                text += &format!(
                    "{:.16e},{},{},{},{}\n",
                    r.c,
                    r.kind.map_or(String::new(), |k| k.to_string()),
                    cell(r.w),
                    cell(r.w_tilde),
                    cell(r.err_est)
                );
            }
            emit(cfg, &text)?;
        }
        Command::Verify => {
            let p = cfg.params()?;
            let tol = cfg.num(&cfg.f.tol, "tol")?.unwrap_or(1e-6);
            let ds = cfg.num(&cfg.f.ds, "ds")?.unwrap_or(1e-3);
            let margin = cfg.num(&cfg.f.margin, "margin")?.unwrap_or(0.05);
            let convention = match cfg.f.convention {
                Some(Convention::Fixed) => NormalConvention::Fixed,
                _ => NormalConvention::Continuous,
            };
            let samples = match classify(&p)? {
                DelaunayType::StaticTorus | DelaunayType::NegStaticTorus => {
                    let curve = static_torus_curve(&p, cfg.grid_size()?)?;
                    let s = curve.samples.iter().map(|q| q.s).collect();
                    let s1: Vec<f64> = curve.samples.iter().map(|q| q.s1).collect();
                    let inc = s1.windows(2).map(|w| w[1] - w[0]).collect();
                    PhaseSamples { s, s1, inc }
                }
                _ => profile_samples(&p, ds, margin)?,
            };
            let rep = mean_curvature_fd(&samples, &p, cfg.f.stencil.unwrap_or(5), convention)?;
            let passed = rep.passed(tol);
            emit(cfg, &json_line(&json!({ "passed": passed, "tol": tol, "report": rep }))?)?;
            return Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Flower => {
            let n = cfg.n()?;
            let max_den = cfg.f.max_den.unwrap_or(64);
            let h = match (cfg.num(&cfg.f.target_width, "target-width")?, cfg.num(&cfg.f.h, "h")?) {
                (Some(beta), _) => solve_flower_beta(n, beta)?.0,
                (None, Some(h)) if h != 0.0 => h.abs(),
                _ => bail!("flower requires a nonzero --h or --target-width"),
            };
            emit(cfg, &json_line(&flower_closure(n, h, max_den)?)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn fail(err: &anyhow::Error) -> ExitCode {
    use delaunay_core::Error as E;
    let core = err.chain().find_map(|e| e.downcast_ref::<E>());
    let (kind, code) = match core {
        Some(E::NonConvergent { .. }) => ("non_convergence", 3),
        Some(_) => ("invalid_input", 2),
        None => ("validation", 2),
    };
    let msg = format!("{err:#}");
    eprintln!("{}", json!({ "error": kind, "message": msg }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DELAUNAY_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "validation", "message": e.to_string().trim_end() }));
            return ExitCode::from(2);
        }
    };
    match RunConfig::load(cli).and_then(|cfg| run(&cfg)) {
        Ok(code) => code,
        Err(err) => fail(&err),
    }
}
