//! Density-matrix Fourier components and the propagator factors of the
//! first-order response.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// One Fourier component of the density operator in the beat frequency
/// omega_pc: order 0 is the probe-free steady state, orders -1/+1 carry the
/// linear probe response (per unit probe amplitude, so in units 1/gamma).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityComponent {
    /// Fourier order, one of -1, 0, +1.
    pub order: i8,
    /// 4x4 matrix in the bare basis |1>..|4|>.
    pub matrix: Matrix4<C64>,
}

impl DensityComponent {
    pub fn new(order: i8, matrix: Matrix4<C64>) -> Result<Self> {
        if !matches!(order, -1..=1) {
            return Err(Error::InvalidInput(format!(
                "Fourier order must be -1, 0, or +1, got {order}"
            )));
        }
        Ok(DensityComponent { order, matrix })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest elementwise deviation from Hermiticity, max |m - m^dagger|.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.matrix.adjoint();
        (self.matrix - adj)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Checks the order-0 state invariants: Hermitian and unit trace within
    /// `tol`, diagonal real and inside [0, 1].
    pub fn check_state(&self, tol: f64) -> Result<()> {
        if self.order != 0 {
            return Err(Error::InvalidInput(
                "check_state applies to the order-0 component".into(),
            ));
        }
        if self.hermiticity_error() > tol {
            return Err(Error::InvalidInput(format!(
                "state is not Hermitian within {tol:e}"
            )));
        }
        if (self.trace() - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidInput(format!(
                "state trace differs from 1 beyond {tol:e}"
            )));
        }
        for i in 0..4 {
            let d = self.matrix[(i, i)];
            if d.im.abs() > tol || !(-tol..=1.0 + tol).contains(&d.re) {
                return Err(Error::InvalidInput(format!(
                    "population {i} out of range: {d}"
                )));
            }
        }
        Ok(())
    }
}

/// The complex propagator factors entering the first-order coherences,
/// evaluated at a beat frequency omega_pc and control detuning Delta:
///
/// ```text
/// p = -Gamma1 + i omega_pc        r = -Gamma2 + i omega_pc
/// q = p - i Delta                 s = p + i Delta
/// u = -Gamma3 + i omega_pc
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorFactors {
    pub p: C64,
    pub q: C64,
    pub r: C64,
    pub s: C64,
    pub u: C64,
}

impl PropagatorFactors {
    pub fn evaluate(
        gamma_ge: f64,
        gamma_gg: f64,
        gamma_ee: f64,
        delta_c: f64,
        omega_pc: f64,
    ) -> Self {
        let p = C64::new(-gamma_ge, omega_pc);
        let i_delta = C64::new(0.0, delta_c);
        PropagatorFactors {
            p,
            q: p - i_delta,
            r: C64::new(-gamma_gg, omega_pc),
            s: p + i_delta,
            u: C64::new(-gamma_ee, omega_pc),
        }
    }
}

impl SystemParams {
    /// Propagator factors for this parameter set at beat frequency `omega_pc`.
    pub fn propagators(&self, omega_pc: f64) -> PropagatorFactors {
        PropagatorFactors::evaluate(
            self.gamma_ge,
            self.gamma_gg,
            self.gamma_ee,
            self.delta_c,
            omega_pc,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_factors_by_direct_construction() {
        let f = PropagatorFactors::evaluate(1.5, 0.0, 3.0, 0.7, 2.0);
        assert_eq!(f.p, C64::new(-1.5, 2.0));
        assert_eq!(f.q, C64::new(-1.5, 2.0 - 0.7));
        assert_eq!(f.r, C64::new(0.0, 2.0));
        assert_eq!(f.s, C64::new(-1.5, 2.0 + 0.7));
        assert_eq!(f.u, C64::new(-3.0, 2.0));
    }

    #[test]
    fn order_must_be_sideband_or_dc() {
        assert!(DensityComponent::new(2, Matrix4::zeros()).is_err());
        assert!(DensityComponent::new(-1, Matrix4::zeros()).is_ok());
    }

    #[test]
    fn hermiticity_error_detects_asymmetry() {
        let mut m = Matrix4::zeros();
        m[(0, 1)] = C64::new(0.0, 1.0);
        m[(1, 0)] = C64::new(0.0, 1.0); // not the conjugate
        let d = DensityComponent::new(0, m).unwrap();
        assert!(d.hermiticity_error() > 1.9);
    }
}
