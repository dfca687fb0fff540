//! First-order probe response: closed forms for the probe coherences
//! rho_31^(-1) and rho_42^(-1), a brute-force sideband solver used as the
//! oracle, and the sampled susceptibility.
//!
//! All response values are per unit probe Rabi amplitude; with rates in
//! gamma units they are the dimensionless quantities that enter the
//! susceptibility directly.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::density::DensityComponent;
use crate::error::{Error, Result};
use crate::master::{liouvillian, probe_operator, solve_trace_replaced, Liouvillian};
use crate::params::SystemParams;
use crate::steady_state::{zeroth_order, ZerothOrder};

/// Denominator magnitude below which a closed-form evaluation is reported
/// as a pole (a genuine 0/0, e.g. no control field at two-photon resonance
/// with no ground dephasing).
pub const POLE_DENOMINATOR_FLOOR: f64 = 1e-300;

/// The six closed-form contributions to the two probe coherences and their
/// sums. `a1` is the population-difference term of rho_31, `b1` and `c1`
/// the terms proportional to the control-induced coherences rho_23 and
/// rho_14; `a2`, `b2`, `c2` are the partners for rho_42.
#[derive(Debug, Clone, Copy)]
pub struct CoherenceBreakdown {
    pub a1: C64,
    pub b1: C64,
    pub c1: C64,
    pub a2: C64,
    pub b2: C64,
    pub c2: C64,
    pub rho31: C64,
    pub rho42: C64,
    pub rho_pi: C64,
}

impl CoherenceBreakdown {
    fn assemble(a1: C64, b1: C64, c1: C64, a2: C64, b2: C64, c2: C64) -> Self {
        let rho31 = a1 + b1 + c1;
        let rho42 = a2 + b2 + c2;
        let rho_pi = rho31 + rho42;
        debug_assert!((rho31 - (a1 + b1 + c1)).norm() <= 1e-14 * rho31.norm().max(1.0));
        debug_assert!((rho42 - (a2 + b2 + c2)).norm() <= 1e-14 * rho42.norm().max(1.0));
        CoherenceBreakdown {
            a1,
            b1,
            c1,
            a2,
            b2,
            c2,
            rho31,
            rho42,
            rho_pi,
        }
    }
}

/// Equal-component closed form: both first-order coherences are equal and
/// given by
///
/// ```text
///            [-i r s u + (omega_pc |G|^2 / (Gamma1 - i Delta)) (r + u)] rho_pd
/// rho_31 =   -----------------------------------------------------------------
///                      q r s u + 2 |G|^2 p (r + u)
/// ```
pub fn response_equal_g(
    p: &SystemParams,
    zeroth: &ZerothOrder,
    omega_pc: f64,
) -> Result<(C64, C64)> {
    let g = p.equal_g().ok_or(Error::UnequalAmplitudes)?;
    let f = p.propagators(omega_pc);
    let g2 = C64::new(g.norm_sqr(), 0.0);
    let rho_pd = C64::new(zeroth.rho_pd, 0.0);
    let ru = f.r + f.u;
    let num = (-C64::i() * f.r * f.s * f.u
        + C64::new(omega_pc, 0.0) * g2 / C64::new(p.gamma_ge, -p.delta_c) * ru)
        * rho_pd;
    let den = f.q * f.r * f.s * f.u + 2.0 * g2 * f.p * ru;
    if den.norm() < POLE_DENOMINATOR_FLOOR {
        return Err(Error::Pole {
            omega_pc,
            diagnostic: den.norm(),
        });
    }
    let val = num / den;
    Ok((val, val))
}

/// General closed form for arbitrary G1, G2 (complex allowed), assembled
/// from the six contribution terms.
pub fn response_general(
    p: &SystemParams,
    zeroth: &ZerothOrder,
    omega_pc: f64,
) -> Result<CoherenceBreakdown> {
    let f = p.propagators(omega_pc);
    let m = zeroth.matrix();
    let a1s = C64::new(p.g1.norm_sqr(), 0.0);
    let a2s = C64::new(p.g2.norm_sqr(), 0.0);
    let diff = a1s - a2s;
    let pd1 = m[(0, 0)] - m[(2, 2)];
    let pd2 = m[(1, 1)] - m[(3, 3)];
    let r23 = m[(1, 2)];
    let r14 = m[(0, 3)];
    let (q, r, s, u) = (f.q, f.r, f.s, f.u);
    let qrsu = q * r * s * u;
    let d1 = qrsu + a2s * (q * r + s * u) + a1s * (q * u + r * s) + diff * diff;
    let d2 = qrsu + a1s * (q * r + s * u) + a2s * (q * u + r * s) + diff * diff;
    if d1.norm() < POLE_DENOMINATOR_FLOOR || d2.norm() < POLE_DENOMINATOR_FLOOR {
        return Err(Error::Pole {
            omega_pc,
            diagnostic: d1.norm().min(d2.norm()),
        });
    }
    let a1 = -C64::i() * (r * s * u + a2s * r + a1s * u) * pd1 / d1;
    let b1 = (s * u + a2s - a1s) * p.g2 * r23 / d1;
    let c1 = (r * s - a2s + a1s) * p.g1 * r14 / d1;
    let a2 = -C64::i() * (r * s * u + a1s * r + a2s * u) * pd2 / d2;
    let b2 = (s * u + a1s - a2s) * p.g1 * r14 / d2;
    let c2 = (r * s - a1s + a2s) * p.g2 * r23 / d2;
    Ok(CoherenceBreakdown::assemble(a1, b1, c1, a2, b2, c2))
}

/// Brute-force oracle: solves the full 16-component linear system for the
/// -1 sideband around the supplied steady state and returns
/// (rho_31^(-1), rho_42^(-1)).
pub fn response_numeric(
    p: &SystemParams,
    zeroth: &ZerothOrder,
    omega_pc: f64,
) -> Result<(C64, C64)> {
    let x = sideband_matrix(p, zeroth, omega_pc, -1)?;
    Ok((x[(2, 0)], x[(3, 1)]))
}

/// Solves one sideband system. Order -1 solves
/// (L0 + i omega_pc) X = -i [V, rho0]; order +1 solves
/// (L0 - i omega_pc) X = -i [V^dagger, rho0]. Both have zero trace.
fn sideband_matrix(
    p: &SystemParams,
    zeroth: &ZerothOrder,
    omega_pc: f64,
    order: i8,
) -> Result<Matrix4<C64>> {
    let mut m: Liouvillian = liouvillian(p);
    let iw = match order {
        -1 => C64::new(0.0, omega_pc),
        1 => C64::new(0.0, -omega_pc),
        _ => return Err(Error::InvalidInput("sideband order must be +-1".into())),
    };
    for d in 0..16 {
        m[(d, d)] += iw;
    }
    let v = probe_operator();
    let coupling = if order == -1 { v } else { v.adjoint() };
    let rho0 = zeroth.matrix();
    let src = (coupling * rho0 - rho0 * coupling) * (-C64::i());
    match solve_trace_replaced(&m, &src, C64::new(0.0, 0.0)) {
        Ok((x, _)) => Ok(x),
        Err(Error::DegenerateSteadyState { cond }) => Err(Error::Pole {
            omega_pc,
            diagnostic: cond,
        }),
        Err(e) => Err(e),
    }
}

/// Both sideband components, solved independently. They must be mutual
/// conjugate transposes; checked by the test suite, not enforced here.
pub fn sideband_components(
    p: &SystemParams,
    zeroth: &ZerothOrder,
    omega_pc: f64,
) -> Result<(DensityComponent, DensityComponent)> {
    let minus = sideband_matrix(p, zeroth, omega_pc, -1)?;
    let plus = sideband_matrix(p, zeroth, omega_pc, 1)?;
    Ok((
        DensityComponent::new(-1, minus)?,
        DensityComponent::new(1, plus)?,
    ))
}

/// Total probe coherence rho_pi = rho_31^(-1) + rho_42^(-1) by the closed
/// forms, dispatching to the equal-component expression when applicable.
pub fn rho_pi(p: &SystemParams, zeroth: &ZerothOrder, omega_pc: f64) -> Result<C64> {
    if p.equal_g().is_some() {
        let (a, b) = response_equal_g(p, zeroth, omega_pc)?;
        Ok(a + b)
    } else {
        Ok(response_general(p, zeroth, omega_pc)?.rho_pi)
    }
}

/// Sampled complex response over a probe-detuning grid.
#[derive(Debug, Clone)]
pub struct ResponseSpectrum {
    /// Probe detunings, in gamma.
    pub delta: Vec<f64>,
    /// rho_pi per grid point; `None` marks a flagged pole point.
    pub rho_pi: Vec<Option<C64>>,
    /// chi_pi = (3 N c^3 / 2 omega_p^3) rho_pi per grid point.
    pub chi: Vec<Option<C64>>,
    /// Human-readable notes: per-point pole flags, accuracy warnings.
    pub warnings: Vec<String>,
}

pub(crate) fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::GridNotIncreasing);
    }
    Ok(())
}

/// Susceptibility sampled on a strictly increasing probe-detuning grid.
/// Pole points are flagged, not fatal. Real part is dispersion, imaginary
/// part absorption.
pub fn susceptibility(p: &SystemParams, delta_grid: &[f64]) -> Result<ResponseSpectrum> {
    p.validate()?;
    check_increasing(delta_grid)?;
    let zeroth = zeroth_order(p)?;
    let pref = p.chi_prefactor();
    let mut rho = Vec::with_capacity(delta_grid.len());
    let mut chi = Vec::with_capacity(delta_grid.len());
    let mut warnings = Vec::new();
    for (i, &d) in delta_grid.iter().enumerate() {
        match rho_pi(p, &zeroth, d - p.delta_c) {
            Ok(v) => {
                rho.push(Some(v));
                chi.push(Some(pref * v));
            }
            Err(e) if e.is_pole() => {
                rho.push(None);
                chi.push(None);
                warnings.push(format!("point {i} (delta = {d} gamma) flagged: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ResponseSpectrum {
        delta: delta_grid.to_vec(),
        rho_pi: rho,
        chi,
        warnings,
    })
}
