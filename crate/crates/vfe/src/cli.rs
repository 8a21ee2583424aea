//! Config-driven batch front end behind the `vfe` binary.
//!
//! Every subcommand reads a flat `key=value` config (file plus `--set`
//! overrides), runs one scenario, writes CSV artifacts into the output
//! directory, echoes the fully resolved configuration for exact replay, and
//! prints a short summary to stdout. Validation problems exit with code 2,
//! solver failures with code 3.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::critfield::{critical_field_table, h_n, optimal_n, ModelConstants};
use crate::fields::{
    axis_return_curve, ball_meissner_curl, c_omega_estimate, COmegaOptions, FieldJet,
};
use crate::geometry::{AxisJet, BallGeometry, SampledGraph, TubeChart};
use crate::isoflux::{
    ball_hessian_closed_form, maximize_ratio, q_spectrum, MaximizeOptions, QFormSpec,
    RatioContext,
};
use crate::profile::{gamma_from_profile, perforated_renormalized_check, solve_f0};
use crate::renorm::{
    el_residual, isotropic_polygon_minimum, min_pair_separation, wn_minimize, EndpointMode,
    FilamentFamily, WnOptions,
};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "vfe",
    version,
    about = "Vortex filament energetics for 3D Ginzburg-Landau near the first critical field"
)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,

    /// Flat key=value config file ('#' starts a comment line).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one config key (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Directory receiving the CSV artifacts and the resolved config echo.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,

    /// Seed for randomized initializers; overrides the `seed` config key.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy, Debug)]
pub enum Command {
    /// Ball chart summary: axis metric and field jets, flux, reference ratio.
    BallSetup,
    /// Maximize the flux-to-length ratio from a random start curve.
    IsofluxMaximize,
    /// Generalized spectrum of the second-variation form on the ball axis.
    QSpectrum,
    /// Minimize the renormalized interaction energy of N filaments.
    WnMinimize,
    /// Tabulate the critical-field ladder H_N.
    CriticalFields,
    /// Energy-optimal filament count over an applied-field sweep.
    OptimalN,
    /// Radial vortex profile and the core-energy constant.
    ProfileGamma,
    /// Renormalized-energy quadrature check on a perforated disk.
    PerforatedCheck,
    /// Domain constant from the regularised field energy of a test filament.
    COmega,
}

/// Every key a subcommand may read. Unknown keys are rejected up front so a
/// typo cannot silently fall back to a default.
const ACCEPTED_KEYS: &[&str] = &[
    "geometry.ball.rho",
    "discretization.elements",
    "profile.r_max",
    "profile.nodes",
    "model.r0",
    "model.l0",
    "model.gamma",
    "model.c_omega",
    "model.j0",
    "model.min_w",
    "scenario.eps",
    "scenario.h_ex",
    "scenario.h_min",
    "scenario.h_max",
    "scenario.h_steps",
    "scenario.n_max",
    "scenario.points",
    "scenario.delta",
    "scenario.r",
    "wn.n",
    "wn.spec",
    "wn.radius",
    "wn.phase",
    "wn.grad_tol",
    "wn.max_iter",
    "wn.endpoints",
    "maximize.amplitude",
    "maximize.grad_tol",
    "maximize.max_iter",
    "comega.cuts",
    "comega.margin",
    "comega.arc_segments",
    "comega.multiplicity",
    "comega.theta_nodes",
    "comega.z_nodes",
    "comega.radial_gauss",
    "seed",
];

/// Parsed configuration plus a record of every value actually used,
/// including defaults, for the replay echo.
pub struct RunConfig {
    values: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

fn split_kv(raw: &str) -> Option<(&str, &str)> {
    let (k, v) = raw.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k, v.trim()))
}

fn check_key(key: &str) -> Result<()> {
    if ACCEPTED_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "unknown config key {key:?}; accepted keys: {}",
            ACCEPTED_KEYS.join(", ")
        )))
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>, sets: &[String], seed_flag: Option<u64>) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = split_kv(line).ok_or_else(|| {
                    Error::Validation(format!(
                        "line {} of {} is not key=value: {raw:?}",
                        lineno + 1,
                        p.display()
                    ))
                })?;
                check_key(k)?;
                values.insert(k.to_string(), v.to_string());
            }
        }
        for s in sets {
            let (k, v) = split_kv(s)
                .ok_or_else(|| Error::Validation(format!("--set expects key=value, got {s:?}")))?;
            check_key(k)?;
            values.insert(k.to_string(), v.to_string());
        }
        if let Some(seed) = seed_flag {
            values.insert("seed".into(), seed.to_string());
        }
        Ok(RunConfig {
            values,
            resolved: RefCell::new(BTreeMap::new()),
        })
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.borrow_mut().insert(key.to_string(), value);
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            Some(raw) => {
                let v: f64 = raw.parse().map_err(|_| {
                    Error::Validation(format!("config key {key} must be a number, got {raw:?}"))
                })?;
                self.record(key, raw.to_string());
                Ok(v)
            }
            None => {
                self.record(key, format!("{default}"));
                Ok(default)
            }
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            Some(raw) => {
                let v: usize = raw.parse().map_err(|_| {
                    Error::Validation(format!(
                        "config key {key} must be a nonnegative integer, got {raw:?}"
                    ))
                })?;
                self.record(key, raw.to_string());
                Ok(v)
            }
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            Some(raw) => {
                let v: u64 = raw.parse().map_err(|_| {
                    Error::Validation(format!(
                        "config key {key} must be a nonnegative integer, got {raw:?}"
                    ))
                })?;
                self.record(key, raw.to_string());
                Ok(v)
            }
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        let v = self.raw(key).unwrap_or(default).to_string();
        self.record(key, v.clone());
        v
    }

    pub fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            Some(raw) => {
                let mut out = Vec::new();
                for piece in raw.split(',') {
                    let v: f64 = piece.trim().parse().map_err(|_| {
                        Error::Validation(format!(
                            "config key {key} must be a comma-separated number list, got {raw:?}"
                        ))
                    })?;
                    out.push(v);
                }
                self.record(key, raw.to_string());
                Ok(out)
            }
            None => {
                let rendered: Vec<String> = default.iter().map(|v| format!("{v}")).collect();
                self.record(key, rendered.join(","));
                Ok(default.to_vec())
            }
        }
    }

    /// Planar points encoded as `x,y;x,y;...`.
    pub fn get_points(&self, key: &str, default: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        match self.raw(key) {
            Some(raw) => {
                let mut out = Vec::new();
                for piece in raw.split(';') {
                    let bad = || {
                        Error::Validation(format!(
                            "config key {key} must look like x,y;x,y, got {raw:?}"
                        ))
                    };
                    let (x, y) = piece.split_once(',').ok_or_else(bad)?;
                    out.push([
                        x.trim().parse().map_err(|_| bad())?,
                        y.trim().parse().map_err(|_| bad())?,
                    ]);
                }
                self.record(key, raw.to_string());
                Ok(out)
            }
            None => {
                let rendered: Vec<String> =
                    default.iter().map(|p| format!("{},{}", p[0], p[1])).collect();
                self.record(key, rendered.join(";"));
                Ok(default.to_vec())
            }
        }
    }

    /// Writes the `key=value` echo of everything this run read.
    pub fn write_resolved(&self, out_dir: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in self.resolved.borrow().iter() {
            text.push_str(k);
            text.push('=');
            text.push_str(v);
            text.push('\n');
        }
        std::fs::write(out_dir.join("resolved_config.txt"), text)?;
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Parses the config, runs the requested subcommand, and writes the
/// resolved-config echo. The binary maps the error to its exit code.
pub fn run(args: &Args) -> Result<()> {
    let cfg = RunConfig::load(args.config.as_deref(), &args.set, args.seed)?;
    std::fs::create_dir_all(&args.out)?;
    // the seed is global; resolve it up front so every echo records it even
    // when the subcommand draws nothing
    cfg.get_u64("seed", 0)?;
    match args.command {
        Command::BallSetup => ball_setup(&cfg, &args.out)?,
        Command::IsofluxMaximize => isoflux_maximize_cmd(&cfg, &args.out)?,
        Command::QSpectrum => q_spectrum_cmd(&cfg, &args.out)?,
        Command::WnMinimize => wn_minimize_cmd(&cfg, &args.out)?,
        Command::CriticalFields => critical_fields_cmd(&cfg, &args.out)?,
        Command::OptimalN => optimal_n_cmd(&cfg, &args.out)?,
        Command::ProfileGamma => profile_gamma_cmd(&cfg, &args.out)?,
        Command::PerforatedCheck => perforated_check_cmd(&cfg, &args.out)?,
        Command::COmega => c_omega_cmd(&cfg, &args.out)?,
    }
    cfg.write_resolved(&args.out)
}

fn ball_setup(cfg: &RunConfig, out: &Path) -> Result<()> {
    let rho = cfg.get_f64("geometry.ball.rho", 0.1)?;
    let m = cfg.get_usize("discretization.elements", 64)?.max(2);
    let ctx = RatioContext::ball(rho)?;
    let axis = AxisJet::ball(rho)?;
    let field = FieldJet::ball(rho)?;
    let l0 = ctx.l0();
    let mut rows = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let s = l0 * k as f64 / m as f64;
        rows.push(vec![
            num(s),
            num(ctx.chart().z_of_s(s)),
            num(axis.g_perp(s)[0][0]),
            num(field.quad(s)[0][0]),
        ]);
    }
    write_csv(&out.join("ball_axis.csv"), "s,z,g_perp,field_quad", &rows)?;

    let z_grid: Vec<f64> = (0..=m).map(|k| -1.0 + 2.0 * k as f64 / m as f64).collect();
    let ones = vec![1.0; m + 1];
    let zeros = vec![0.0; m + 1];
    let hess = ball_hessian_closed_form(rho, &z_grid, &ones, &zeros)?;
    println!("rho={}", num(rho));
    println!("l0={}", num(l0));
    println!("flux0={}", num(ctx.flux0()));
    println!("r0={}", num(ctx.r0()));
    println!("hessian_unit={}", num(hess));
    println!(
        "curl_mid={}",
        num(ball_meissner_curl(rho, 0.5 * rho, FRAC_PI_2)?)
    );
    Ok(())
}

fn isoflux_maximize_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let rho = cfg.get_f64("geometry.ball.rho", 0.1)?;
    let m = cfg.get_usize("discretization.elements", 32)?.max(2);
    let amplitude = cfg.get_f64("maximize.amplitude", 0.1)?;
    let defaults = MaximizeOptions::default();
    let grad_tol = cfg.get_f64("maximize.grad_tol", defaults.grad_tol)?;
    let max_iter = cfg.get_usize("maximize.max_iter", defaults.max_iter)?;
    let seed = cfg.get_u64("seed", 0)?;

    let ctx = RatioContext::ball(rho)?;
    let l0 = ctx.l0();
    let scale = amplitude * ctx.chart().delta();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let start = SampledGraph::uniform(l0, m, |s| {
        let t = PI * s / l0;
        let mut u = [0.0; 2];
        for (comp, uc) in u.iter_mut().enumerate() {
            for mode in 1..=3usize {
                let base = comp * 6 + (mode - 1) * 2;
                let phase = mode as f64 * t;
                *uc += scale / mode as f64
                    * (coef[base] * phase.cos() + coef[base + 1] * phase.sin());
            }
        }
        u
    });

    let outcome = maximize_ratio(&ctx, &start, &MaximizeOptions { grad_tol, max_iter })?;
    let rows: Vec<Vec<String>> = outcome
        .ratio_trace
        .iter()
        .zip(&outcome.grad_trace)
        .enumerate()
        .map(|(i, (r, g))| vec![i.to_string(), num(*r), num(*g)])
        .collect();
    write_csv(
        &out.join("maximize_trace.csv"),
        "iteration,ratio,gradient_norm",
        &rows,
    )?;
    if !outcome.converged {
        return Err(Error::NonConvergence(format!(
            "ratio maximization stopped at gradient norm {:.3e} after {} iterations",
            outcome.grad_norm, outcome.iterations
        )));
    }
    println!("ratio_max={}", num(outcome.ratio));
    println!("axis_ratio={}", num(ctx.r0()));
    println!("final_displacement={}", num(outcome.curve.max_displacement()));
    println!("iterations={}", outcome.iterations);
    println!("boundary_projections={}", outcome.boundary_projections);
    Ok(())
}

fn q_spectrum_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let rho = cfg.get_f64("geometry.ball.rho", 0.1)?;
    let m = cfg.get_usize("discretization.elements", 32)?;
    let spec = QFormSpec::ball(rho)?;
    let sp = q_spectrum(&spec, m)?;
    let rows: Vec<Vec<String>> = sp
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, v)| vec![k.to_string(), num(*v)])
        .collect();
    write_csv(
        &out.join("q_spectrum.csv"),
        "mode_index,rayleigh_quotient",
        &rows,
    )?;
    println!("lambda_min={}", num(sp.lambda_min));
    println!("lambda_max={}", num(sp.lambda_max));
    println!("lambda_min_refined={}", num(sp.lambda_min_refined));
    println!("lambda_max_refined={}", num(sp.lambda_max_refined));
    println!(
        "refinement_drift={}",
        num((sp.lambda_min_refined - sp.lambda_min).abs() / sp.lambda_min.abs())
    );
    Ok(())
}

fn wn_minimize_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let n = cfg.get_usize("wn.n", 2)?;
    let m = cfg.get_usize("discretization.elements", 48)?.max(2);
    let kind = cfg.get_str("wn.spec", "isotropic");
    let spec = match kind.as_str() {
        "isotropic" => QFormSpec::synthetic_isotropic(),
        "kinetic" => QFormSpec::pure_kinetic(cfg.get_f64("model.l0", 1.0)?)?,
        "ball" => QFormSpec::ball(cfg.get_f64("geometry.ball.rho", 0.1)?)?,
        other => {
            return Err(Error::Validation(format!(
                "wn.spec must be one of isotropic, kinetic, ball; got {other:?}"
            )))
        }
    };
    let default_radius = if kind == "ball" { 0.2 } else { 1.2 };
    let radius = cfg.get_f64("wn.radius", default_radius)?;
    let seed = cfg.get_u64("seed", 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn_phase = rng.gen::<f64>() * 2.0 * PI;
    let phase = cfg.get_f64("wn.phase", drawn_phase)?;
    let endpoints = match cfg.get_str("wn.endpoints", "free").as_str() {
        "free" => EndpointMode::Free,
        "clamped" => EndpointMode::Clamped,
        other => {
            return Err(Error::Validation(format!(
                "wn.endpoints must be free or clamped, got {other:?}"
            )))
        }
    };
    let defaults = WnOptions::default();
    let opts = WnOptions {
        endpoints,
        // looser than the library default: the descent floor rises with the
        // filament count at the CLI's 48-element grid, and 5e-7 still pins
        // separations to ~1e-7
        grad_tol: cfg.get_f64("wn.grad_tol", 5e-7)?,
        max_iter: cfg.get_usize("wn.max_iter", defaults.max_iter)?,
    };
    let start = FilamentFamily::polygon(spec.l0(), m, n, radius, phase)?;
    let outcome = wn_minimize(&spec, &start, &opts)?;

    let mut family_rows = Vec::new();
    for (i, curve) in outcome.family.curves().iter().enumerate() {
        for (z, u) in curve.z_nodes().iter().zip(curve.u_values()) {
            family_rows.push(vec![i.to_string(), num(*z), num(u[0]), num(u[1])]);
        }
    }
    write_csv(
        &out.join("wn_family.csv"),
        "curve_index,z,u_x,u_y",
        &family_rows,
    )?;
    let trace_rows: Vec<Vec<String>> = outcome
        .energy_trace
        .iter()
        .zip(&outcome.grad_trace)
        .zip(&outcome.separation_trace)
        .enumerate()
        .map(|(i, ((e, g), s))| vec![i.to_string(), num(*e), num(*g), num(*s)])
        .collect();
    write_csv(
        &out.join("wn_trace.csv"),
        "iter,energy,grad_norm,min_separation",
        &trace_rows,
    )?;

    println!("wn_total={}", num(outcome.value.total));
    println!("wn_tension={}", num(outcome.value.tension));
    println!("wn_interaction={}", num(outcome.value.interaction));
    println!("grad_norm={}", num(outcome.grad_norm));
    println!("iterations={}", outcome.iterations);
    println!(
        "el_residual={}",
        num(el_residual(&spec, &outcome.family)?)
    );
    println!(
        "min_separation={}",
        num(min_pair_separation(&outcome.family))
    );
    if kind == "isotropic" {
        println!("polygon_reference={}", num(isotropic_polygon_minimum(n)));
    }
    Ok(())
}

/// Model constants for the critical-field commands: defaults come from the
/// ball geometry and the isotropic interaction minima.
fn model_constants(cfg: &RunConfig, n_max: usize) -> Result<ModelConstants> {
    let rho = cfg.get_f64("geometry.ball.rho", 0.1)?;
    let ctx = RatioContext::ball(rho)?;
    let r0 = cfg.get_f64("model.r0", ctx.r0())?;
    let l0 = cfg.get_f64("model.l0", ctx.l0())?;
    let gamma = cfg.get_f64("model.gamma", 1.1967)?;
    let c_omega = cfg.get_f64("model.c_omega", 0.0)?;
    let j0 = cfg.get_f64("model.j0", 0.0)?;
    let default_w: Vec<f64> = (0..=n_max).map(isotropic_polygon_minimum).collect();
    let min_w = cfg.get_f64_list("model.min_w", &default_w)?;
    if min_w.len() <= n_max {
        return Err(Error::Validation(format!(
            "model.min_w must tabulate filament counts 0..={n_max}, got {} entries",
            min_w.len()
        )));
    }
    ModelConstants::new(r0, l0, gamma, c_omega, j0, min_w)
}

fn critical_fields_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let eps = cfg.get_f64("scenario.eps", 1e-3)?;
    let n_max = cfg.get_usize("scenario.n_max", 5)?;
    let consts = model_constants(cfg, n_max)?;
    let h1 = h_n(1, eps, &consts)?;
    let h_ex = cfg.get_f64("scenario.h_ex", h1)?;
    let table = critical_field_table(eps, h_ex, &consts, n_max)?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), num(r.k_n), num(r.h_n), num(r.g_eps)])
        .collect();
    write_csv(&out.join("critical_fields.csv"), "N,k_N,H_N,g_eps_N", &rows)?;
    println!("eps={}", num(eps));
    println!("h_ex={}", num(h_ex));
    println!("h_1={}", num(table.rows[0].h_n));
    println!("monotone={}", table.monotone);
    Ok(())
}

fn optimal_n_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let eps = cfg.get_f64("scenario.eps", 1e-3)?;
    let n_max = cfg.get_usize("scenario.n_max", 6)?;
    let consts = model_constants(cfg, n_max)?;
    let h1 = h_n(1, eps, &consts)?;
    let h_top = h_n(n_max, eps, &consts)?;
    let h_min = cfg.get_f64("scenario.h_min", 0.5 * h1)?;
    let h_max = cfg.get_f64("scenario.h_max", 1.05 * h_top)?;
    let steps = cfg.get_usize("scenario.h_steps", 200)?.max(2);
    if !(h_max > h_min) {
        return Err(Error::Validation(format!(
            "the sweep needs scenario.h_max > scenario.h_min, got {h_min} .. {h_max}"
        )));
    }
    let mut rows = Vec::with_capacity(steps);
    let mut prev = 0usize;
    let mut nondecreasing = true;
    let mut last = 0usize;
    for k in 0..steps {
        let h = h_min + (h_max - h_min) * k as f64 / (steps - 1) as f64;
        let n = optimal_n(h, eps, &consts, n_max)?;
        if n < prev {
            nondecreasing = false;
        }
        prev = n;
        last = n;
        rows.push(vec![num(h), n.to_string()]);
    }
    write_csv(&out.join("optimal_n.csv"), "h_ex,optimal_n", &rows)?;
    println!("h_min={}", num(h_min));
    println!("h_max={}", num(h_max));
    println!("final_count={last}");
    println!("nondecreasing={nondecreasing}");
    Ok(())
}

fn profile_gamma_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let r_max = cfg.get_f64("profile.r_max", 100.0)?;
    let nodes = cfg.get_usize("profile.nodes", 8001)?;
    let profile = solve_f0(r_max, nodes)?;
    let rows: Vec<Vec<String>> = profile
        .r_nodes()
        .iter()
        .zip(profile.f_values())
        .map(|(r, f)| vec![num(*r), num(*f)])
        .collect();
    write_csv(&out.join("profile.csv"), "r,f", &rows)?;

    let mut radii = vec![r_max];
    while *radii.last().unwrap() / 2.0 >= 10.0 {
        let next = radii.last().unwrap() / 2.0;
        radii.push(next);
    }
    radii.reverse();
    let mut gamma_rows = Vec::with_capacity(radii.len());
    for &r in &radii {
        gamma_rows.push(vec![num(r), num(gamma_from_profile(&profile, r)?)]);
    }
    write_csv(&out.join("gamma_convergence.csv"), "R,gamma_est", &gamma_rows)?;

    let g_full = gamma_from_profile(&profile, r_max)?;
    let g_half = gamma_from_profile(&profile, r_max / 2.0)?;
    println!("gamma_est={} err={}", num(g_full), num((g_full - g_half).abs()));
    Ok(())
}

fn perforated_check_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let points = cfg.get_points("scenario.points", &[[0.05, 0.0], [-0.05, 0.0]])?;
    let delta = cfg.get_f64("scenario.delta", 1.0)?;
    let r = cfg.get_f64("scenario.r", 1e-3)?;
    let check = perforated_renormalized_check(&points, delta, r)?;
    write_csv(
        &out.join("perforated.csv"),
        "numeric,closed_form,deviation",
        &[vec![
            num(check.numeric),
            num(check.closed_form),
            num(check.deviation),
        ]],
    )?;
    println!("numeric={}", num(check.numeric));
    println!("closed_form={}", num(check.closed_form));
    println!("deviation={}", num(check.deviation));
    println!("relative={}", num(check.deviation / check.closed_form));
    Ok(())
}

fn c_omega_cmd(cfg: &RunConfig, out: &Path) -> Result<()> {
    let rho = cfg.get_f64("geometry.ball.rho", 1.0)?;
    let cuts = cfg.get_f64_list("comega.cuts", &[0.2, 0.1, 0.05])?;
    let margin = cfg.get_f64("comega.margin", 0.3)?;
    let arc_segments = cfg.get_usize("comega.arc_segments", 48)?;
    let opts = COmegaOptions {
        multiplicity: cfg.get_f64("comega.multiplicity", 1.0)?,
        theta_nodes: cfg.get_usize("comega.theta_nodes", 32)?,
        z_nodes: cfg.get_usize("comega.z_nodes", 24)?,
        radial_gauss: cfg.get_usize("comega.radial_gauss", 8)?,
    };
    let ball = BallGeometry::new(rho)?;
    let curve = axis_return_curve(&ball, margin, arc_segments)?;
    let report = c_omega_estimate(&ball, &curve, &cuts, &opts)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![num(r.rho_cut), num(r.energy), num(r.counterterm), num(r.sum)])
        .collect();
    write_csv(&out.join("c_omega.csv"), "rho,energy,counterterm,sum", &rows)?;
    println!("c_omega={}", num(report.extrapolated));
    println!("converged={}", report.converged);
    Ok(())
}
