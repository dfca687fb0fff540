//! Rotating-frame master-equation generator for the probe-free system and
//! the linear solves built on it.
//!
//! The generator acts on density matrices flattened row-major into C^16.
//! Its coherence damping uses the stored dephasings (`Gamma1..3`), so
//! overrides propagate; population transfer uses `gamma1`, `gamma2`.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

pub type Liouvillian = SMatrix<C64, 16, 16>;

/// Ill-conditioning threshold for the direct solves.
pub const CONDITION_LIMIT: f64 = 1e12;

#[inline]
pub fn flat(row: usize, col: usize) -> usize {
    4 * row + col
}

/// Probe-free rotating-frame Hamiltonian (units of gamma). The detuning
/// enters with the sign convention that makes the damped coherence
/// |4><1| evolve as d/dt rho_41 = -(i Delta + Gamma1) rho_41 + ...
pub fn control_hamiltonian(p: &SystemParams) -> Matrix4<C64> {
    let mut h = Matrix4::zeros();
    let d = C64::new(p.delta_c, 0.0);
    h[(2, 2)] = d;
    h[(3, 3)] = d;
    h[(3, 0)] = -p.g1;
    h[(0, 3)] = -p.g1.conj();
    h[(2, 1)] = -p.g2;
    h[(1, 2)] = -p.g2.conj();
    h
}

/// Probe coupling operator V = |3><1| + |4><2| (per unit probe amplitude).
pub fn probe_operator() -> Matrix4<C64> {
    let mut v = Matrix4::zeros();
    v[(2, 0)] = C64::new(1.0, 0.0);
    v[(3, 1)] = C64::new(1.0, 0.0);
    v
}

/// Dephasing rate of the (a, b) coherence from the stored Gamma's.
fn coherence_damping(p: &SystemParams, a: usize, b: usize) -> f64 {
    let ground = |i: usize| i < 2;
    match (ground(a), ground(b)) {
        (true, true) => p.gamma_gg,
        (false, false) => p.gamma_ee,
        _ => p.gamma_ge,
    }
}

/// Probe-free Liouvillian L0 with rho' = L0(rho): coherent control coupling,
/// spontaneous decay 3->1 (gamma1), 3->2 (gamma2), 4->1 (gamma2),
/// 4->2 (gamma1), and flat dephasing of every coherence.
pub fn liouvillian(p: &SystemParams) -> Liouvillian {
    let h = control_hamiltonian(p);
    let i = C64::i();
    let mut l = Liouvillian::zeros();
    // -i [H, rho]
    for a in 0..4 {
        for b in 0..4 {
            let row = flat(a, b);
            for m in 0..4 {
                l[(row, flat(m, b))] += -i * h[(a, m)];
                l[(row, flat(a, m))] += i * h[(m, b)];
            }
        }
    }
    // population transfer
    let (g1, g2) = (C64::new(p.gamma1, 0.0), C64::new(p.gamma2, 0.0));
    l[(flat(0, 0), flat(2, 2))] += g1;
    l[(flat(0, 0), flat(3, 3))] += g2;
    l[(flat(1, 1), flat(2, 2))] += g2;
    l[(flat(1, 1), flat(3, 3))] += g1;
    l[(flat(2, 2), flat(2, 2))] -= g1 + g2;
    l[(flat(3, 3), flat(3, 3))] -= g1 + g2;
    // coherence damping
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                let row = flat(a, b);
                l[(row, row)] -= C64::new(coherence_damping(p, a, b), 0.0);
            }
        }
    }
    l
}

/// 1-norm (maximum absolute column sum).
fn norm1(m: &Liouvillian) -> f64 {
    (0..16)
        .map(|j| (0..16).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition estimate ||A||_1 ||A^-1||_1; infinite when singular.
pub fn condition_estimate(m: &Liouvillian) -> f64 {
    match m.try_inverse() {
        Some(inv) => norm1(m) * norm1(&inv),
        None => f64::INFINITY,
    }
}

/// Solves `m x = rhs` after replacing the rho_11 row by the trace
/// constraint sum_i x_ii = `trace`. The replaced equation is implied by the
/// remaining rows whenever the right-hand side is traceless, which holds for
/// both the steady-state and the sideband systems; the replacement removes
/// the near-singular direction along the steady state.
pub fn solve_trace_replaced(
    m: &Liouvillian,
    rhs: &Matrix4<C64>,
    trace: C64,
) -> Result<(Matrix4<C64>, f64)> {
    let mut a = *m;
    let row = flat(0, 0);
    for j in 0..16 {
        a[(row, j)] = C64::new(0.0, 0.0);
    }
    for d in 0..4 {
        a[(row, flat(d, d))] = C64::new(1.0, 0.0);
    }
    let mut b = SVector::<C64, 16>::zeros();
    for r in 0..4 {
        for c in 0..4 {
            b[flat(r, c)] = rhs[(r, c)];
        }
    }
    b[row] = trace;

    let cond = condition_estimate(&a);
    if cond.is_nan() || cond >= CONDITION_LIMIT {
        return Err(Error::DegenerateSteadyState { cond });
    }
    let x = a
        .lu()
        .solve(&b)
        .ok_or(Error::DegenerateSteadyState { cond: f64::INFINITY })?;
    let mut out = Matrix4::zeros();
    for r in 0..4 {
        for c in 0..4 {
            out[(r, c)] = x[flat(r, c)];
        }
    }
    Ok((out, cond))
}
