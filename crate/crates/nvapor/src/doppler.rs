//! Maxwell-Boltzmann velocity averaging of the susceptibility and the
//! Doppler-broadened group index.
//!
//! Copropagating geometry: a velocity class shifts both detunings by the
//! same kv, so the beat frequency omega_pc = delta - Delta is common to all
//! classes and the two-photon resonance is Doppler-immune. Averaging uses
//! Gauss-Hermite quadrature with the weights renormalized to unit sum.
//!
//! Convergence caveat: the velocity integrand carries structure on the
//! scale of the power-broadened linewidth (a few gamma), far narrower than
//! a thermal width of hundreds of gamma, so Gauss-Hermite node counts in
//! the hundreds resolve it only approximately. `doppler_average` therefore
//! re-runs at twice the node count and attaches an accuracy warning when
//! the doubling moves the result by more than 1e-6 relative.

use num_complex::Complex64 as C64;

use crate::constants::{C_LIGHT, K_BOLTZMANN};
use crate::error::{Error, Result};
use crate::linear_response::{check_increasing, rho_pi, ResponseSpectrum};
use crate::observables::{GroupIndexPoint, FD_STEP_DEFAULT};
use crate::params::SystemParams;
use crate::steady_state::zeroth_order;

/// Doppler-averaging configuration.
#[derive(Debug, Clone, Copy)]
pub struct DopplerConfig {
    /// Doppler width (standard deviation of the kv distribution), in gamma.
    pub omega_d: f64,
    /// Gauss-Hermite node count.
    pub n_nodes: usize,
    /// Integration half-width in units of omega_d; nodes beyond it are
    /// dropped and the weights renormalized.
    pub cutoff: f64,
}

impl Default for DopplerConfig {
    fn default() -> Self {
        DopplerConfig {
            omega_d: 324.0,
            n_nodes: 200,
            cutoff: 8.0,
        }
    }
}

impl DopplerConfig {
    /// Builds a config whose width follows from the gas temperature and
    /// atomic mass, expressed in gamma units of `params`.
    pub fn from_temperature(
        temperature_k: f64,
        mass_kg: f64,
        params: &SystemParams,
    ) -> Result<Self> {
        let width = doppler_width(temperature_k, mass_kg, params.omega_p)?;
        Ok(DopplerConfig {
            omega_d: width / params.gamma_si,
            ..DopplerConfig::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_d.is_finite() && self.omega_d > 0.0) {
            return Err(Error::Validation {
                field: "omega_d".into(),
                reason: format!("must be > 0, got {}", self.omega_d),
            });
        }
        if self.n_nodes < 32 {
            return Err(Error::Validation {
                field: "n_nodes".into(),
                reason: format!("must be >= 32, got {}", self.n_nodes),
            });
        }
        if self.cutoff.is_nan() || self.cutoff < 4.0 {
            return Err(Error::Validation {
                field: "cutoff".into(),
                reason: format!("must be >= 4 (units of omega_d), got {}", self.cutoff),
            });
        }
        Ok(())
    }
}

/// Doppler width omega_D = omega_p sqrt(K_B T / (M c^2)) in rad/s.
pub fn doppler_width(temperature_k: f64, mass_kg: f64, omega_p: f64) -> Result<f64> {
    if !(temperature_k.is_finite() && temperature_k > 0.0) {
        return Err(Error::Validation {
            field: "temperature".into(),
            reason: format!("must be > 0, got {temperature_k}"),
        });
    }
    if !(mass_kg.is_finite() && mass_kg > 0.0) {
        return Err(Error::Validation {
            field: "mass".into(),
            reason: format!("must be > 0, got {mass_kg}"),
        });
    }
    Ok(omega_p * (K_BOLTZMANN * temperature_k / (mass_kg * C_LIGHT * C_LIGHT)).sqrt())
}

/// Gauss-Hermite nodes and weights for weight function exp(-t^2): the sum
/// of the weights is sqrt(pi). Nodes come out sorted ascending.
///
/// Nodes are the eigenvalues of the Jacobi matrix (Golub-Welsch), polished
/// by a few Newton steps on the orthonormal-polynomial recurrence; weights
/// follow from w = 1/(n p_{n-1}(z)^2) evaluated in log form, so far-tail
/// weights underflow cleanly to zero and no intermediate overflows at any
/// order. Results are cached per process.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    type Rule = (Vec<f64>, Vec<f64>);
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let rule = gauss_hermite_uncached(n);
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn gauss_hermite_uncached(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least two nodes");
    let nf = n as f64;

    // Newton step p_n / p_n' = (p_n / p_{n-1}) / sqrt(2n), with the pair
    // evaluated by the three-term recurrence under a common rescale.
    let newton_step = |t: f64| -> f64 {
        let mut pm = 0.0f64;
        let mut p = std::f64::consts::PI.powf(-0.25);
        for j in 0..n {
            let jf = j as f64;
            let next = t * (2.0 / (jf + 1.0)).sqrt() * p - (jf / (jf + 1.0)).sqrt() * pm;
            pm = p;
            p = next;
            if p.abs() > 1e150 {
                p *= 1e-150;
                pm *= 1e-150;
            }
        }
        p / ((2.0 * nf).sqrt() * pm)
    };

    // ln |p_{n-1}(t)| (starts O(1), grows like exp(t^2/2); rescaled).
    let ln_abs_p_prev = |t: f64| -> f64 {
        let mut scale_ln = 0.0f64;
        let mut pm = 0.0f64;
        let mut p = std::f64::consts::PI.powf(-0.25);
        for j in 0..n - 1 {
            let jf = j as f64;
            let next = t * (2.0 / (jf + 1.0)).sqrt() * p - (jf / (jf + 1.0)).sqrt() * pm;
            pm = p;
            p = next;
            if p.abs() > 1e150 {
                p *= 1e-150;
                pm *= 1e-150;
                scale_ln += 150.0 * std::f64::consts::LN_10;
            }
        }
        p.abs().ln() + scale_ln
    };

    // Jacobi matrix of the orthonormal Hermite family: zero diagonal,
    // off-diagonal sqrt(j/2).
    let diag = vec![0.0f64; n];
    let off: Vec<f64> = (1..n).map(|j| (j as f64 / 2.0).sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(diag, off);
    nodes.sort_by(f64::total_cmp);
    for z in &mut nodes {
        for _ in 0..4 {
            let dz = newton_step(*z);
            *z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
    }
    // enforce exact +- symmetry
    for i in 0..n / 2 {
        let mag = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[n - 1 - i] = mag;
        nodes[i] = -mag;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let mut weights = vec![0.0f64; n];
    for i in 0..n.div_ceil(2) {
        let z = nodes[n - 1 - i];
        let w = (-(nf.ln() + 2.0 * ln_abs_p_prev(z))).exp();
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    (nodes, weights)
}

/// Eigenvalues of a symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (length n-1), by the implicit QL iteration with
/// Wilkinson shifts. Eigenvalues only; O(n^2) overall.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(&off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let denom = g + if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / denom;
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if i == l {
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
            }
        }
    }
    d
}

/// Velocity classes (kv in gamma) and normalized weights for a config,
/// after the cutoff truncation.
fn velocity_classes(cfg: &DopplerConfig, n_nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_hermite(n_nodes);
    let vmax = cfg.cutoff * cfg.omega_d;
    let mut v = Vec::with_capacity(n_nodes);
    let mut wt = Vec::with_capacity(n_nodes);
    for (ti, wi) in t.iter().zip(&w) {
        let vi = std::f64::consts::SQRT_2 * cfg.omega_d * ti;
        if vi.abs() <= vmax {
            v.push(vi);
            wt.push(*wi);
        }
    }
    let total: f64 = wt.iter().sum();
    for x in &mut wt {
        *x /= total;
    }
    (v, wt)
}

/// One averaging pass at a given node count; per-point `None` when any
/// velocity class hits a pole at that detuning.
fn average_once(
    p: &SystemParams,
    cfg: &DopplerConfig,
    n_nodes: usize,
    delta_grid: &[f64],
) -> Result<Vec<Option<C64>>> {
    let (v, wt) = velocity_classes(cfg, n_nodes);
    let mut acc: Vec<Option<C64>> = vec![Some(C64::new(0.0, 0.0)); delta_grid.len()];
    for (vi, wi) in v.iter().zip(&wt) {
        let mut pv = p.clone();
        pv.delta_c = p.delta_c + vi;
        pv.delta_p = p.delta_p + vi;
        let zeroth = zeroth_order(&pv)?;
        for (k, &d) in delta_grid.iter().enumerate() {
            if acc[k].is_none() {
                continue;
            }
            // the class shift cancels in the beat frequency
            match rho_pi(&pv, &zeroth, d - p.delta_c) {
                Ok(val) => {
                    if let Some(a) = acc[k].as_mut() {
                        *a += *wi * val;
                    }
                }
                Err(e) if e.is_pole() => acc[k] = None,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(acc)
}

/// Velocity-averaged response over a probe-detuning grid. Runs the
/// quadrature at `n_nodes` and `2 n_nodes`; when the doubling changes the
/// result by more than 1e-6 relative (against the largest magnitude on the
/// grid), an accuracy warning is attached to the spectrum.
pub fn doppler_average(
    p: &SystemParams,
    cfg: &DopplerConfig,
    delta_grid: &[f64],
) -> Result<ResponseSpectrum> {
    p.validate()?;
    cfg.validate()?;
    check_increasing(delta_grid)?;
    let coarse = average_once(p, cfg, cfg.n_nodes, delta_grid)?;
    let fine = average_once(p, cfg, 2 * cfg.n_nodes, delta_grid)?;
    let scale = fine
        .iter()
        .flatten()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut max_rel = 0.0f64;
    for (a, b) in coarse.iter().zip(&fine) {
        if let (Some(a), Some(b)) = (a, b) {
            max_rel = max_rel.max((a - b).norm() / scale);
        }
    }
    let mut warnings = Vec::new();
    if max_rel > 1e-6 {
        warnings.push(format!(
            "quadrature not converged: doubling {} -> {} nodes changes the result by {:.3e} relative; increase n_nodes",
            cfg.n_nodes,
            2 * cfg.n_nodes,
            max_rel
        ));
    }
    let pref = p.chi_prefactor();
    let chi = coarse.iter().map(|o| o.map(|c| pref * c)).collect();
    Ok(ResponseSpectrum {
        delta: delta_grid.to_vec(),
        rho_pi: coarse,
        chi,
        warnings,
    })
}

/// Doppler-broadened group index at the probe detuning stored in `params`,
/// with the same finite-difference contract as the unbroadened version.
pub fn doppler_group_index(p: &SystemParams, cfg: &DopplerConfig) -> Result<GroupIndexPoint> {
    doppler_group_index_with_step(p, cfg, FD_STEP_DEFAULT)
}

/// Doppler-broadened group index with an explicit step (gamma units).
pub fn doppler_group_index_with_step(
    p: &SystemParams,
    cfg: &DopplerConfig,
    h: f64,
) -> Result<GroupIndexPoint> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidInput(format!("fd step must be > 0, got {h}")));
    }
    let d0 = p.delta_p;
    let grid = [d0 - 2.0 * h, d0 - h, d0, d0 + h, d0 + 2.0 * h];
    let spec = doppler_average(p, cfg, &grid)?;
    let mut s = [0.0f64; 5];
    for (slot, chi) in s.iter_mut().zip(&spec.chi) {
        match chi {
            Some(c) => *slot = c.re,
            None => return Err(Error::StencilPole { delta: d0 }),
        }
    }
    let d5 = (-s[4] + 8.0 * s[3] - 8.0 * s[1] + s[0]) / (12.0 * h);
    let deriv_si = d5 / p.gamma_si;
    let tau = std::f64::consts::TAU;
    let n_g = 1.0 + tau * s[2] + tau * p.omega_p * deriv_si;
    Ok(GroupIndexPoint {
        g1: p.g1.norm(),
        g2: p.g2.norm(),
        delta_c: p.delta_c,
        n_g,
        v_g: C_LIGHT / n_g,
        re_chi: s[2],
        d_re_chi_d_omega: deriv_si,
    })
}

/// Searches for a crossing of the averaged n_g through 1 on [g_lo, g_hi]
/// (equal components): coarse scan, then bisection to `tol`. Returns `None`
/// when no sign change exists on the interval.
pub fn doppler_unity_crossing(
    p: &SystemParams,
    cfg: &DopplerConfig,
    g_lo: f64,
    g_hi: f64,
    scan_points: usize,
    tol: f64,
) -> Result<Option<f64>> {
    let f = |g: f64| -> Result<f64> {
        Ok(doppler_group_index(&p.with_equal_g(g), cfg)?.n_g - 1.0)
    };
    let n = scan_points.max(2);
    let step = (g_hi - g_lo) / (n - 1) as f64;
    let mut prev_g = g_lo;
    let mut prev_f = f(g_lo)?;
    for k in 1..n {
        let g = g_lo + k as f64 * step;
        let fg = f(g)?;
        if prev_f == 0.0 {
            return Ok(Some(prev_g));
        }
        if prev_f.signum() != fg.signum() {
            let (mut lo, mut hi, mut flo) = (prev_g, g, prev_f);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid)?;
                if fm == 0.0 {
                    return Ok(Some(mid));
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_g = g;
        prev_f = fg;
    }
    Ok(None)
}
