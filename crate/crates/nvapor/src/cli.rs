//! Command-line surface: spectra, group-index sweeps, contours, Doppler
//! runs, pulse propagation; CSV/JSON emission and config loading.
//!
//! Every output file is paired with a `<file>.manifest.json` naming the
//! fully resolved parameter set; re-running the same invocation reproduces
//! byte-identical CSV bodies (floats are printed with 17 significant
//! digits). Pole-flagged grid points become empty CSV cells plus a
//! `<file>.warnings.txt` sidecar. `NVAPOR_NO_COLOR` disables ANSI codes on
//! stderr.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write as IoWrite};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::constants::C_LIGHT;
use crate::doppler::{doppler_average, doppler_group_index, doppler_unity_crossing, DopplerConfig};
use crate::error::{Error, Result};
use crate::linear_response::{susceptibility, ResponseSpectrum};
use crate::observables::{group_index, GroupIndexPoint};
use crate::params::{build_params, parse_config, SystemParams};
use crate::pulse::{delay_to_group_index, propagate, PulseSpec};

#[derive(Parser, Debug)]
#[command(
    name = "nvapor",
    version,
    about = "Linear response, group index, Doppler averaging, and pulse propagation \
             of a control-driven four-level vapor"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Config file with `key = value` lines (keys: gamma1, Gamma1, G1, Delta, ...).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output CSV path (or path prefix for `pulse`).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Sweep-point concurrency; defaults to the logical core count.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Complex probe response and susceptibility over a detuning grid.
    Spectrum(SpectrumArgs),
    /// Group-index sweeps: equal components, G1 at fixed G2, or a contour.
    Groupindex(GroupindexArgs),
    /// Gaussian pulse propagation through the medium and through vacuum.
    Pulse(PulseArgs),
    /// Velocity-averaged spectra and group-index sweeps.
    Doppler(DopplerArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    /// Equal control amplitude G (gamma units); shorthand for --G1 x --G2 x.
    #[arg(long = "G", allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long = "G1", allow_hyphen_values = true)]
    pub g1: Option<f64>,
    #[arg(long = "G2", allow_hyphen_values = true)]
    pub g2: Option<f64>,
    /// Control detuning Delta (gamma units).
    #[arg(long = "Delta", allow_hyphen_values = true)]
    pub delta_c: Option<f64>,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    pub delta_max: f64,
    /// Number of grid points (inclusive endpoints).
    #[arg(long, default_value_t = 1201)]
    pub steps: usize,
    /// Velocity-average the response before emitting.
    #[arg(long)]
    pub doppler: bool,
    #[command(flatten)]
    pub doppler_opts: DopplerOpts,
}

#[derive(Args, Debug, Clone)]
pub struct DopplerOpts {
    /// Doppler width in gamma units.
    #[arg(long = "omega-d", default_value_t = 324.0)]
    pub omega_d: f64,
    /// Gauss-Hermite node count.
    #[arg(long, default_value_t = 200)]
    pub nodes: usize,
    /// Truncation half-width in units of omega_d.
    #[arg(long, default_value_t = 8.0)]
    pub cutoff: f64,
}

impl DopplerOpts {
    fn config(&self) -> DopplerConfig {
        DopplerConfig {
            omega_d: self.omega_d,
            n_nodes: self.nodes,
            cutoff: self.cutoff,
        }
    }
}

#[derive(Args, Debug)]
pub struct GroupindexArgs {
    /// Equal-component sweep range start (gamma units).
    #[arg(long = "G-min")]
    pub g_min: Option<f64>,
    #[arg(long = "G-max")]
    pub g_max: Option<f64>,
    /// Point count for the 1-D sweeps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// G1 sweep range (requires --G2 for a 1-D sweep, or --G2-min/--G2-max
    /// for a contour).
    #[arg(long = "G1-min")]
    pub g1_min: Option<f64>,
    #[arg(long = "G1-max")]
    pub g1_max: Option<f64>,
    #[arg(long = "G1-steps")]
    pub g1_steps: Option<usize>,
    /// Fixed G2 for the G1 sweep.
    #[arg(long = "G2")]
    pub g2: Option<f64>,
    #[arg(long = "G2-min")]
    pub g2_min: Option<f64>,
    #[arg(long = "G2-max")]
    pub g2_max: Option<f64>,
    #[arg(long = "G2-steps")]
    pub g2_steps: Option<usize>,
    #[arg(long = "Delta", allow_hyphen_values = true)]
    pub delta_c: Option<f64>,
}

#[derive(Args, Debug)]
pub struct PulseArgs {
    #[arg(long = "G", allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long = "G1", allow_hyphen_values = true)]
    pub g1: Option<f64>,
    #[arg(long = "G2", allow_hyphen_values = true)]
    pub g2: Option<f64>,
    #[arg(long = "Delta", allow_hyphen_values = true)]
    pub delta_c: Option<f64>,
    /// Spectral width as a plain frequency; sigma = 2 pi * this (Hz).
    #[arg(long, default_value_t = 5000.0)]
    pub sigma_hz: f64,
    /// Medium length (m).
    #[arg(long = "L", default_value_t = 0.01)]
    pub length: f64,
    /// Time samples (power of two).
    #[arg(long, default_value_t = 16384)]
    pub samples: usize,
    /// Window half-width in units of 1/sigma.
    #[arg(long, default_value_t = 8.0)]
    pub window: f64,
    /// Input envelope amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub eps0: f64,
}

#[derive(Args, Debug)]
pub struct DopplerArgs {
    #[command(subcommand)]
    pub mode: DopplerMode,
}

#[derive(Subcommand, Debug)]
pub enum DopplerMode {
    /// Velocity-averaged spectrum (same columns as `spectrum`).
    Spectrum(SpectrumArgs),
    /// Velocity-averaged equal-component group-index sweep.
    Groupindex(DopplerGroupArgs),
}

#[derive(Args, Debug)]
pub struct DopplerGroupArgs {
    #[arg(long = "G-min")]
    pub g_min: f64,
    #[arg(long = "G-max")]
    pub g_max: f64,
    #[arg(long, default_value_t = 25)]
    pub steps: usize,
    #[arg(long = "Delta", allow_hyphen_values = true)]
    pub delta_c: Option<f64>,
    /// Also bisect the n_g = 1 crossing on [G-min, G-max] and write it to
    /// a summary JSON.
    #[arg(long)]
    pub find_crossing: bool,
    #[command(flatten)]
    pub doppler_opts: DopplerOpts,
}

/// Run manifest emitted alongside every output file.
#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: BTreeMap<String, f64>,
    pub grid: serde_json::Value,
    pub outputs: Vec<String>,
    pub jobs: usize,
    pub tool_version: String,
    pub timestamp_unix: u64,
}

fn warn_user(msg: &str) {
    if std::env::var_os("NVAPOR_NO_COLOR").is_some() {
        eprintln!("warning: {msg}");
    } else {
        eprintln!("\x1b[33mwarning:\x1b[0m {msg}");
    }
}

/// 17-significant-digit float formatting; fixed across platforms.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 2 steps, got {steps}"
        )));
    }
    if min.is_nan() || max.is_nan() || min >= max {
        return Err(Error::InvalidInput(format!(
            "grid bounds must satisfy min < max, got [{min}, {max}]"
        )));
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| min + i as f64 * h).collect())
}

fn resolve_params(
    config: Option<&Path>,
    g: Option<f64>,
    g1: Option<f64>,
    g2: Option<f64>,
    delta_c: Option<f64>,
) -> Result<SystemParams> {
    let mut map = match config {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    match (g, g1, g2) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::InvalidInput(
                "--G conflicts with --G1/--G2".into(),
            ))
        }
        (Some(v), None, None) => {
            map.insert("G1".into(), v);
            map.insert("G2".into(), v);
        }
        (None, Some(a), Some(b)) => {
            map.insert("G1".into(), a);
            map.insert("G2".into(), b);
        }
        (None, None, None) => {}
        _ => {
            return Err(Error::InvalidInput(
                "--G1 and --G2 must be given together".into(),
            ))
        }
    }
    if let Some(d) = delta_c {
        map.insert("Delta".into(), d);
    }
    build_params(&map)
}

fn effective_jobs(requested: Option<usize>) -> usize {
    match requested {
        Some(0) | None => std::thread::available_parallelism()
            .map(usize::from)
            .unwrap_or(1),
        Some(n) => n,
    }
}

/// Evaluates `f` over `0..n` with up to `jobs` worker threads; results come
/// back in index order regardless of the worker count.
fn par_map<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.max(1).min(n.max(1));
    if jobs == 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(jobs);
    let mut chunks: Vec<Vec<T>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..jobs {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(n);
            let f = &f;
            handles.push(scope.spawn(move || (lo..hi).map(f).collect::<Vec<T>>()));
        }
        for h in handles {
            chunks.push(h.join().expect("sweep worker panicked"));
        }
    });
    chunks.into_iter().flatten().collect()
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = PathBuf::from(format!("{}.manifest.json", out.display()));
    let body = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, body + "\n")?;
    Ok(path)
}

fn write_warnings(out: &Path, warnings: &[String]) -> Result<Option<PathBuf>> {
    if warnings.is_empty() {
        return Ok(None);
    }
    let path = PathBuf::from(format!("{}.warnings.txt", out.display()));
    fs::write(&path, warnings.join("\n") + "\n")?;
    for w in warnings {
        warn_user(w);
    }
    Ok(Some(path))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .map(|c| c.map(fmt_float).unwrap_or_default())
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn manifest_base(subcommand: &str, params: &SystemParams, jobs: usize) -> RunManifest {
    RunManifest {
        subcommand: subcommand.into(),
        params: params.to_key_values(),
        grid: serde_json::Value::Null,
        outputs: Vec::new(),
        jobs,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    }
}

fn spectrum_rows(spec: &ResponseSpectrum) -> Vec<Vec<Option<f64>>> {
    spec.delta
        .iter()
        .zip(spec.rho_pi.iter().zip(&spec.chi))
        .map(|(d, (rho, chi))| {
            vec![
                Some(*d),
                rho.map(|c| c.re),
                rho.map(|c| c.im),
                chi.map(|c| c.re),
                chi.map(|c| c.im),
            ]
        })
        .collect()
}

const SPECTRUM_HEADER: [&str; 5] = [
    "delta_over_gamma",
    "re_rho_pi",
    "im_rho_pi",
    "re_chi",
    "im_chi",
];

fn cmd_spectrum(cli_out: Option<&Path>, cfg: Option<&Path>, a: &SpectrumArgs, jobs: usize) -> Result<()> {
    let params = resolve_params(cfg, a.g, a.g1, a.g2, a.delta_c)?;
    let grid = linspace(a.delta_min, a.delta_max, a.steps)?;
    let spec = if a.doppler {
        doppler_average(&params, &a.doppler_opts.config(), &grid)?
    } else {
        susceptibility(&params, &grid)?
    };
    let out = cli_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("spectrum.csv"));
    write_csv(&out, &SPECTRUM_HEADER, &spectrum_rows(&spec))?;
    let mut manifest = manifest_base("spectrum", &params, jobs);
    manifest.grid = serde_json::json!({
        "delta_min": a.delta_min, "delta_max": a.delta_max, "steps": a.steps,
        "doppler": a.doppler,
        "omega_d": a.doppler_opts.omega_d,
        "nodes": a.doppler_opts.nodes,
        "cutoff": a.doppler_opts.cutoff,
    });
    manifest.outputs = vec![out.display().to_string()];
    write_manifest(&out, &manifest)?;
    write_warnings(&out, &spec.warnings)?;
    Ok(())
}

fn sweep_rows(points: &[(f64, Option<GroupIndexPoint>)]) -> Vec<Vec<Option<f64>>> {
    points
        .iter()
        .map(|(g, pt)| {
            vec![
                Some(*g),
                pt.map(|p| p.n_g),
                pt.map(|p| p.v_g / C_LIGHT),
            ]
        })
        .collect()
}

enum GroupindexMode {
    SweepEqual { grid: Vec<f64> },
    SweepG1 { grid: Vec<f64>, g2: f64 },
    Contour { g1: Vec<f64>, g2: Vec<f64> },
}

fn groupindex_mode(a: &GroupindexArgs) -> Result<GroupindexMode> {
    let has_equal = a.g_min.is_some() || a.g_max.is_some();
    let has_g1 = a.g1_min.is_some() || a.g1_max.is_some();
    let has_g2_range = a.g2_min.is_some() || a.g2_max.is_some();
    match (has_equal, has_g1, has_g2_range, a.g2) {
        (true, false, false, None) => {
            let (lo, hi) = (require(a.g_min, "--G-min")?, require(a.g_max, "--G-max")?);
            Ok(GroupindexMode::SweepEqual {
                grid: linspace(lo, hi, a.steps.unwrap_or(121))?,
            })
        }
        (false, true, false, Some(g2)) => {
            let (lo, hi) = (require(a.g1_min, "--G1-min")?, require(a.g1_max, "--G1-max")?);
            Ok(GroupindexMode::SweepG1 {
                grid: linspace(lo, hi, a.g1_steps.or(a.steps).unwrap_or(121))?,
                g2,
            })
        }
        (false, true, true, None) => {
            let g1 = linspace(
                require(a.g1_min, "--G1-min")?,
                require(a.g1_max, "--G1-max")?,
                a.g1_steps.unwrap_or(61),
            )?;
            let g2 = linspace(
                require(a.g2_min, "--G2-min")?,
                require(a.g2_max, "--G2-max")?,
                a.g2_steps.unwrap_or(61),
            )?;
            Ok(GroupindexMode::Contour { g1, g2 })
        }
        _ => Err(Error::InvalidInput(
            "choose one mode: --G-min/--G-max, or --G1-min/--G1-max with --G2, \
             or --G1-min/--G1-max with --G2-min/--G2-max"
                .into(),
        )),
    }
}

fn require<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidInput(format!("{name} is required for this mode")))
}

fn flag_of(err: &Error) -> Option<String> {
    if err.is_pole() || matches!(err, Error::StencilPole { .. }) {
        Some(err.to_string())
    } else {
        None
    }
}

fn cmd_groupindex(
    cli_out: Option<&Path>,
    cfg: Option<&Path>,
    a: &GroupindexArgs,
    jobs: usize,
) -> Result<()> {
    let base = resolve_params(cfg, None, None, None, a.delta_c)?;
    let out = cli_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("groupindex.csv"));
    let mut warnings: Vec<String> = Vec::new();
    let mut manifest = manifest_base("groupindex", &base, jobs);

    match groupindex_mode(a)? {
        GroupindexMode::SweepEqual { grid } => {
            let results = par_map(grid.len(), jobs, |i| {
                group_index(&base.with_equal_g(grid[i]))
            });
            let mut points = Vec::with_capacity(grid.len());
            for (g, r) in grid.iter().zip(results) {
                match r {
                    Ok(pt) => points.push((*g, Some(pt))),
                    Err(e) => match flag_of(&e) {
                        Some(f) => {
                            warnings.push(format!("G = {g}: {f}"));
                            points.push((*g, None));
                        }
                        None => return Err(e),
                    },
                }
            }
            write_csv(&out, &["G_over_gamma", "n_g", "v_g_over_c"], &sweep_rows(&points))?;
            manifest.grid = serde_json::json!({"mode": "sweep_G", "grid": grid});
        }
        GroupindexMode::SweepG1 { grid, g2 } => {
            let results = par_map(grid.len(), jobs, |i| {
                group_index(&base.with_g1_g2(grid[i], g2))
            });
            let mut points = Vec::with_capacity(grid.len());
            for (g, r) in grid.iter().zip(results) {
                match r {
                    Ok(pt) => points.push((*g, Some(pt))),
                    Err(e) => match flag_of(&e) {
                        Some(f) => {
                            warnings.push(format!("G1 = {g}: {f}"));
                            points.push((*g, None));
                        }
                        None => return Err(e),
                    },
                }
            }
            write_csv(&out, &["G1_over_gamma", "n_g", "v_g_over_c"], &sweep_rows(&points))?;
            manifest.grid = serde_json::json!({"mode": "sweep_G1", "grid": grid, "G2": g2});
        }
        GroupindexMode::Contour { g1, g2 } => {
            let n1 = g1.len();
            let n2 = g2.len();
            let results = par_map(n1 * n2, jobs, |k| {
                let (i, j) = (k / n2, k % n2);
                group_index(&base.with_g1_g2(g1[i], g2[j]))
            });
            let mut rows = Vec::with_capacity(n1 * n2);
            for (k, r) in results.into_iter().enumerate() {
                let (i, j) = (k / n2, k % n2);
                let ng = match r {
                    Ok(pt) => Some(pt.n_g),
                    Err(e) => match flag_of(&e) {
                        Some(f) => {
                            warnings.push(format!("G1 = {}, G2 = {}: {f}", g1[i], g2[j]));
                            None
                        }
                        None => return Err(e),
                    },
                };
                rows.push(vec![Some(g1[i]), Some(g2[j]), ng]);
            }
            write_csv(&out, &["G1_over_gamma", "G2_over_gamma", "n_g"], &rows)?;
            manifest.grid = serde_json::json!({"mode": "contour", "g1": g1, "g2": g2});
        }
    }
    manifest.outputs = vec![out.display().to_string()];
    write_manifest(&out, &manifest)?;
    write_warnings(&out, &warnings)?;
    Ok(())
}

#[derive(Serialize)]
struct PulseSummary {
    delay_s: f64,
    n_g_from_delay: f64,
    warnings: Vec<String>,
}

fn cmd_pulse(cli_out: Option<&Path>, cfg: Option<&Path>, a: &PulseArgs, jobs: usize) -> Result<()> {
    let params = resolve_params(cfg, a.g, a.g1, a.g2, a.delta_c)?;
    let sigma = std::f64::consts::TAU * a.sigma_hz;
    let spec = PulseSpec {
        sigma,
        eps0: a.eps0,
        length: a.length,
        half_width: a.window / sigma,
        samples: a.samples,
    };
    let trace = propagate(&params, &spec)?;
    let prefix = cli_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("pulse"));
    let vac_path = PathBuf::from(format!("{}_vacuum.csv", prefix.display()));
    let med_path = PathBuf::from(format!("{}_medium.csv", prefix.display()));
    let sum_path = PathBuf::from(format!("{}_summary.json", prefix.display()));

    let rows = |env: &[f64]| -> Vec<Vec<Option<f64>>> {
        trace
            .tau
            .iter()
            .zip(env)
            .map(|(t, e)| vec![Some(*t), Some(*e)])
            .collect()
    };
    write_csv(&vac_path, &["tau_s", "envelope"], &rows(&trace.envelope_vacuum))?;
    write_csv(&med_path, &["tau_s", "envelope"], &rows(&trace.envelope_medium))?;
    let summary = PulseSummary {
        delay_s: trace.delay,
        n_g_from_delay: delay_to_group_index(trace.delay, spec.length)?,
        warnings: trace.warnings.clone(),
    };
    fs::write(&sum_path, serde_json::to_string_pretty(&summary)? + "\n")?;

    let mut manifest = manifest_base("pulse", &params, jobs);
    manifest.grid = serde_json::json!({
        "sigma_rad_s": sigma, "length_m": a.length,
        "samples": a.samples, "window_over_inv_sigma": a.window, "eps0": a.eps0,
    });
    manifest.outputs = vec![
        vac_path.display().to_string(),
        med_path.display().to_string(),
        sum_path.display().to_string(),
    ];
    write_manifest(&prefix, &manifest)?;
    write_warnings(&prefix, &trace.warnings)?;
    Ok(())
}

#[derive(Serialize)]
struct CrossingSummary {
    crossing_g_over_gamma: Option<f64>,
    search_range: [f64; 2],
}

fn cmd_doppler_groupindex(
    cli_out: Option<&Path>,
    cfg: Option<&Path>,
    a: &DopplerGroupArgs,
    jobs: usize,
) -> Result<()> {
    let base = resolve_params(cfg, None, None, None, a.delta_c)?;
    let dcfg = a.doppler_opts.config();
    dcfg.validate()?;
    let grid = linspace(a.g_min, a.g_max, a.steps)?;
    let out = cli_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("doppler_groupindex.csv"));
    let mut warnings = Vec::new();
    let results = par_map(grid.len(), jobs, |i| {
        doppler_group_index(&base.with_equal_g(grid[i]), &dcfg)
    });
    let mut points = Vec::with_capacity(grid.len());
    for (g, r) in grid.iter().zip(results) {
        match r {
            Ok(pt) => points.push((*g, Some(pt))),
            Err(e) => match flag_of(&e) {
                Some(f) => {
                    warnings.push(format!("G = {g}: {f}"));
                    points.push((*g, None));
                }
                None => return Err(e),
            },
        }
    }
    write_csv(&out, &["G_over_gamma", "n_g", "v_g_over_c"], &sweep_rows(&points))?;

    let mut manifest = manifest_base("doppler-groupindex", &base, jobs);
    manifest.grid = serde_json::json!({
        "mode": "sweep_G", "grid": grid,
        "omega_d": dcfg.omega_d, "nodes": dcfg.n_nodes, "cutoff": dcfg.cutoff,
    });
    manifest.outputs = vec![out.display().to_string()];

    if a.find_crossing {
        let crossing = doppler_unity_crossing(&base, &dcfg, a.g_min, a.g_max, a.steps, 1e-3)?;
        let sum_path = PathBuf::from(format!("{}.crossing.json", out.display()));
        let body = serde_json::to_string_pretty(&CrossingSummary {
            crossing_g_over_gamma: crossing,
            search_range: [a.g_min, a.g_max],
        })?;
        fs::write(&sum_path, body + "\n")?;
        if crossing.is_none() {
            warnings.push(format!(
                "no crossing of <n_g> = 1 found on [{}, {}] gamma",
                a.g_min, a.g_max
            ));
        }
        manifest.outputs.push(sum_path.display().to_string());
    }
    write_manifest(&out, &manifest)?;
    write_warnings(&out, &warnings)?;
    Ok(())
}

impl Cli {
    /// Executes the parsed invocation.
    pub fn run(&self) -> Result<()> {
        let jobs = effective_jobs(self.jobs);
        let cfg = self.config.as_deref();
        let out = self.out.as_deref();
        match &self.command {
            Command::Spectrum(a) => cmd_spectrum(out, cfg, a, jobs),
            Command::Groupindex(a) => cmd_groupindex(out, cfg, a, jobs),
            Command::Pulse(a) => cmd_pulse(out, cfg, a, jobs),
            Command::Doppler(d) => match &d.mode {
                DopplerMode::Spectrum(a) => {
                    let forced = SpectrumArgs {
                        doppler: true,
                        ..a.clone()
                    };
                    cmd_spectrum(out, cfg, &forced, jobs)
                }
                DopplerMode::Groupindex(a) => cmd_doppler_groupindex(out, cfg, a, jobs),
            },
        }
    }
}

/// Exit code classification: 2 for usage/validation problems, 1 otherwise.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Validation { .. }
        | Error::UnknownKey { .. }
        | Error::ConfigSyntax { .. }
        | Error::InvalidInput(_)
        | Error::GridNotIncreasing => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints_and_errors() {
        let g = linspace(-6.0, 6.0, 1201).unwrap();
        assert_eq!(g.len(), 1201);
        assert_eq!(g[0], -6.0);
        assert_eq!(*g.last().unwrap(), 6.0);
        assert!(linspace(0.0, 1.0, 0).is_err());
        assert!(linspace(0.0, 1.0, 1).is_err());
        assert!(linspace(1.0, 0.0, 10).is_err());
    }

    #[test]
    fn par_map_is_order_stable() {
        let seq = par_map(100, 1, |i| i * i);
        for jobs in [2, 3, 7, 16] {
            assert_eq!(par_map(100, jobs, |i| i * i), seq);
        }
        assert!(par_map(0, 4, |i| i).is_empty());
    }

    #[test]
    fn resolve_params_modes() {
        let p = resolve_params(None, Some(0.5), None, None, None).unwrap();
        assert_eq!(p.g1.re, 0.5);
        assert_eq!(p.g2.re, 0.5);
        let p = resolve_params(None, None, Some(1.0), Some(2.0), Some(0.3)).unwrap();
        assert_eq!(p.g1.re, 1.0);
        assert_eq!(p.g2.re, 2.0);
        assert_eq!(p.delta_c, 0.3);
        assert!(resolve_params(None, Some(1.0), Some(1.0), None, None).is_err());
        assert!(resolve_params(None, None, Some(1.0), None, None).is_err());
    }

    #[test]
    fn float_format_is_17_digits() {
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_float(-1.0 / 3.0), "-3.3333333333333331e-1");
    }
}
