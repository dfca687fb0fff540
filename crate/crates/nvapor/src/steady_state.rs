//! Probe-free steady state: closed-form solution for equal control
//! components and a direct numeric solver that also covers G1 != G2.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::density::DensityComponent;
use crate::error::{Error, Result};
use crate::master::{liouvillian, solve_trace_replaced};
use crate::params::SystemParams;

/// Steady state together with the saturation parameter and the
/// probe-transition population difference.
#[derive(Debug, Clone)]
pub struct ZerothOrder {
    /// The order-0 density component.
    pub rho0: DensityComponent,
    /// Saturation parameter x = 2|G1|^2 Gamma1 / (Delta^2 + Gamma1^2), in
    /// gamma. For equal components this is the x of the closed-form
    /// populations; for G1 != G2 it refers to the |1>-|4> drive.
    pub x: f64,
    /// Population difference rho_11 - rho_33 on the first probe transition.
    pub rho_pd: f64,
}

impl ZerothOrder {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho0.matrix
    }
}

fn saturation(p: &SystemParams, g: C64) -> f64 {
    let w = p.delta_c * p.delta_c + p.gamma_ge * p.gamma_ge;
    2.0 * g.norm_sqr() * p.gamma_ge / w
}

/// Closed-form steady state for G1 = G2 = G: the populations follow the
/// two-level saturation law and the only nonzero coherences are the
/// control-induced rho_14 = rho_23.
pub fn zeroth_order_analytic(p: &SystemParams) -> Result<ZerothOrder> {
    p.validate()?;
    let g = p.equal_g().ok_or(Error::UnequalAmplitudes)?;
    let sum = p.sum_gamma();
    let x = saturation(p, g);
    let denom = 2.0 * (sum + 2.0 * x);
    let pop_g = (sum + x) / denom;
    let pop_e = x / denom;
    let rho_pd = sum / denom;
    // rho_14 = -i G* rho_pd / (Gamma1 - i Delta)
    let coh = -C64::i() * g.conj() * rho_pd / C64::new(p.gamma_ge, -p.delta_c);
    let mut m = Matrix4::zeros();
    m[(0, 0)] = C64::new(pop_g, 0.0);
    m[(1, 1)] = C64::new(pop_g, 0.0);
    m[(2, 2)] = C64::new(pop_e, 0.0);
    m[(3, 3)] = C64::new(pop_e, 0.0);
    m[(0, 3)] = coh;
    m[(3, 0)] = coh.conj();
    m[(1, 2)] = coh;
    m[(2, 1)] = coh.conj();
    Ok(ZerothOrder {
        rho0: DensityComponent::new(0, m)?,
        x,
        rho_pd,
    })
}

/// Steady state from the full 16-unknown linear system, with the rho_11 row
/// replaced by the unit-trace constraint. Valid for any G1, G2, Delta.
///
/// With both drives off the generator leaves the ground manifold entirely
/// unconstrained (the linear system is structurally singular), so that case
/// returns the symmetric no-pumping state directly.
pub fn zeroth_order_numeric(p: &SystemParams) -> Result<ZerothOrder> {
    p.validate()?;
    if p.g1.norm() == 0.0 && p.g2.norm() == 0.0 {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        return Ok(ZerothOrder {
            rho0: DensityComponent::new(0, m)?,
            x: 0.0,
            rho_pd: 0.5,
        });
    }
    let l = liouvillian(p);
    let (m, _cond) = solve_trace_replaced(&l, &Matrix4::zeros(), C64::new(1.0, 0.0))?;
    let rho_pd = (m[(0, 0)] - m[(2, 2)]).re;
    Ok(ZerothOrder {
        rho0: DensityComponent::new(0, m)?,
        x: saturation(p, p.g1),
        rho_pd,
    })
}

/// Analytic path when the control components are equal, numeric otherwise.
pub fn zeroth_order(p: &SystemParams) -> Result<ZerothOrder> {
    if p.equal_g().is_some() {
        zeroth_order_analytic(p)
    } else {
        zeroth_order_numeric(p)
    }
}
