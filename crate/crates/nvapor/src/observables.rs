//! Group index and velocity, parameter sweeps, unity-crossing detection,
//! and the dressed-state analysis of the resonant drive.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};

use crate::constants::C_LIGHT;
use crate::error::{Error, Result};
use crate::linear_response::{check_increasing, rho_pi, CoherenceBreakdown};
use crate::params::SystemParams;
use crate::steady_state::{zeroth_order, ZerothOrder};

/// Default finite-difference step for the dispersion derivative, in gamma.
/// The narrowest feature swept here has width ~|G|^2/Gamma1 ~ 7e-3 gamma
/// (G = 0.1), so 1e-4 sits well inside it.
pub const FD_STEP_DEFAULT: f64 = 1e-4;

/// Group index and the pieces it was assembled from, at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct GroupIndexPoint {
    /// |G1|, in gamma.
    pub g1: f64,
    /// |G2|, in gamma.
    pub g2: f64,
    /// Control detuning, in gamma.
    pub delta_c: f64,
    /// n_g = 1 + 2 pi Re chi + 2 pi omega_p d(Re chi)/d omega_p.
    pub n_g: f64,
    /// v_g = c / n_g (m/s, sign carried; infinite when n_g = 0).
    pub v_g: f64,
    /// Re chi at the evaluation detuning.
    pub re_chi: f64,
    /// d(Re chi)/d omega_p (s/rad), from the 5-point stencil.
    pub d_re_chi_d_omega: f64,
}

fn assemble_point(p: &SystemParams, re_chi: f64, deriv_si: f64) -> GroupIndexPoint {
    let tau = std::f64::consts::TAU;
    let n_g = 1.0 + tau * re_chi + tau * p.omega_p * deriv_si;
    GroupIndexPoint {
        g1: p.g1.norm(),
        g2: p.g2.norm(),
        delta_c: p.delta_c,
        n_g,
        v_g: C_LIGHT / n_g,
        re_chi,
        d_re_chi_d_omega: deriv_si,
    }
}

/// Re chi on the 5-point stencil around `delta`, through the closed forms.
fn chi_stencil(
    p: &SystemParams,
    zeroth: &ZerothOrder,
    delta: f64,
    h: f64,
) -> Result<[f64; 5]> {
    let pref = p.chi_prefactor();
    let mut out = [0.0; 5];
    for (k, off) in [-2.0, -1.0, 0.0, 1.0, 2.0].iter().enumerate() {
        let d = delta + off * h;
        match rho_pi(p, zeroth, d - p.delta_c) {
            Ok(v) => out[k] = pref * v.re,
            Err(e) if e.is_pole() => return Err(Error::StencilPole { delta }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Group index at the probe detuning stored in `params` (the usual
/// convention is delta = 0), with the default step.
pub fn group_index(p: &SystemParams) -> Result<GroupIndexPoint> {
    group_index_with_step(p, FD_STEP_DEFAULT)
}

/// Group index with an explicit finite-difference step (gamma units). The
/// derivative reported is the 5-point stencil value; the 3-point value is
/// cross-checked against it in the test suite.
pub fn group_index_with_step(p: &SystemParams, h: f64) -> Result<GroupIndexPoint> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidInput(format!("fd step must be > 0, got {h}")));
    }
    p.validate()?;
    let zeroth = zeroth_order(p)?;
    let s = chi_stencil(p, &zeroth, p.delta_p, h)?;
    let d5 = (-s[4] + 8.0 * s[3] - 8.0 * s[1] + s[0]) / (12.0 * h);
    let deriv_si = d5 / p.gamma_si;
    Ok(assemble_point(p, s[2], deriv_si))
}

/// One sample of a sweep; pole points carry a flag instead of a value.
#[derive(Debug, Clone)]
pub struct SweepSample {
    pub g1: f64,
    pub g2: f64,
    pub point: Option<GroupIndexPoint>,
    pub flag: Option<String>,
}

/// Sweep axis: equal components G1 = G2 = G, or G1 with G2 held fixed.
#[derive(Debug, Clone, Copy)]
pub enum SweepAxis {
    EqualG,
    G1 { g2: f64 },
}

impl SweepAxis {
    fn params_at(&self, base: &SystemParams, g: f64) -> SystemParams {
        match *self {
            SweepAxis::EqualG => base.with_equal_g(g),
            SweepAxis::G1 { g2 } => base.with_g1_g2(g, g2),
        }
    }
}

fn sweep_axis(p: &SystemParams, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepSample>> {
    check_increasing(grid)?;
    let mut out = Vec::with_capacity(grid.len());
    for &g in grid {
        let pg = axis.params_at(p, g);
        match group_index(&pg) {
            Ok(pt) => out.push(SweepSample {
                g1: pg.g1.norm(),
                g2: pg.g2.norm(),
                point: Some(pt),
                flag: None,
            }),
            Err(e) if e.is_pole() || matches!(e, Error::StencilPole { .. }) => {
                out.push(SweepSample {
                    g1: pg.g1.norm(),
                    g2: pg.g2.norm(),
                    point: None,
                    flag: Some(e.to_string()),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// n_g along G1 = G2 = G.
pub fn sweep_g(p: &SystemParams, g_grid: &[f64]) -> Result<Vec<SweepSample>> {
    sweep_axis(p, SweepAxis::EqualG, g_grid)
}

/// Bisection of n_g - 1 = 0 between two bracketing drive amplitudes,
/// refined to `tol` (gamma units).
fn bisect_unity(
    p: &SystemParams,
    axis: SweepAxis,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let f = |g: f64| -> Result<f64> { Ok(group_index(&axis.params_at(p, g))?.n_g - 1.0) };
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidInput(format!(
            "no sign change of n_g - 1 on [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All crossings of n_g = 1 along an axis, located by a scan over `grid`
/// and refined by bisection to 1e-4 gamma. Flagged points break brackets.
pub fn unity_crossings(p: &SystemParams, axis: SweepAxis, grid: &[f64]) -> Result<Vec<f64>> {
    let samples = sweep_axis(p, axis, grid)?;
    let mut crossings = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if let (Some(pa), Some(pb)) = (&a.point, &b.point) {
            let fa = pa.n_g - 1.0;
            let fb = pb.n_g - 1.0;
            if fa == 0.0 {
                crossings.push(a.g1);
            } else if fa.signum() != fb.signum() {
                crossings.push(bisect_unity(p, axis, a.g1, b.g1, 1e-4)?);
            }
        }
    }
    Ok(crossings)
}

/// Result of a G1 sweep at fixed G2: the samples, the refined n_g = 1
/// crossings, and the anomalous interval between them when exactly two
/// crossings exist.
#[derive(Debug, Clone)]
pub struct SweepG1Result {
    pub samples: Vec<SweepSample>,
    pub crossings: Vec<f64>,
    pub valley: Option<(f64, f64)>,
}

/// n_g along G1 at fixed G2, with crossing detection.
pub fn sweep_g1(p: &SystemParams, g1_grid: &[f64], g2: f64) -> Result<SweepG1Result> {
    let axis = SweepAxis::G1 { g2 };
    let samples = sweep_axis(p, axis, g1_grid)?;
    let crossings = unity_crossings(p, axis, g1_grid)?;
    let valley = match crossings.as_slice() {
        [a, b] => Some((*a, *b)),
        _ => None,
    };
    Ok(SweepG1Result {
        samples,
        crossings,
        valley,
    })
}

/// n_g over a (G1, G2) grid, with the location of the grid minimum.
#[derive(Debug, Clone)]
pub struct ContourResult {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// `n_g[i][j]` at `(g1[i], g2[j])`; `None` marks flagged points.
    pub n_g: Vec<Vec<Option<f64>>>,
    /// (g1, g2, n_g) of the smallest valid sample.
    pub minimum: Option<(f64, f64, f64)>,
}

/// Full (G1, G2) map of n_g.
pub fn sweep_contour(p: &SystemParams, g1_grid: &[f64], g2_grid: &[f64]) -> Result<ContourResult> {
    check_increasing(g1_grid)?;
    check_increasing(g2_grid)?;
    let mut rows = Vec::with_capacity(g1_grid.len());
    let mut minimum: Option<(f64, f64, f64)> = None;
    for &g1 in g1_grid {
        let mut row = Vec::with_capacity(g2_grid.len());
        for &g2 in g2_grid {
            let pg = p.with_g1_g2(g1, g2);
            match group_index(&pg) {
                Ok(pt) => {
                    if minimum.is_none_or(|(_, _, m)| pt.n_g < m) {
                        minimum = Some((g1, g2, pt.n_g));
                    }
                    row.push(Some(pt.n_g));
                }
                Err(e) if e.is_pole() || matches!(e, Error::StencilPole { .. }) => row.push(None),
                Err(e) => return Err(e),
            }
        }
        rows.push(row);
    }
    Ok(ContourResult {
        g1: g1_grid.to_vec(),
        g2: g2_grid.to_vec(),
        n_g: rows,
        minimum,
    })
}

/// Dressed eigenstructure of one resonant 2x2 drive block, plus the summed
/// probe transition amplitude between the two dressed doublets (which
/// vanishes because the ground-ground dipole is forbidden).
#[derive(Debug, Clone)]
pub struct DressedStates {
    /// Eigenenergies, sorted descending: +|G|, -|G| (gamma units).
    pub energies: [f64; 2],
    /// Eigenvector of the + energy in the (|1>, |4>) basis.
    pub vec_plus: [f64; 2],
    /// Eigenvector of the - energy.
    pub vec_minus: [f64; 2],
    /// Sum of the four dressed transition amplitudes of the probe operator.
    pub amplitude_sum: f64,
}

/// Diagonalizes the resonant drive block with coupling |G| and evaluates
/// the dressed transition-amplitude sum of the probe coupling.
pub fn dressed_states(g_amplitude: f64) -> DressedStates {
    let m = Matrix2::new(0.0, g_amplitude, g_amplitude, 0.0);
    let eig = SymmetricEigen::new(m);
    // sort descending, fix sign gauge so the first component is >= 0
    let mut pairs: Vec<(f64, Vector2<f64>)> = (0..2)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let fix = |v: Vector2<f64>| if v[0] < 0.0 { -v } else { v };
    let vp = fix(pairs[0].1);
    let vm = fix(pairs[1].1);

    // |+/-(14)> = a|1> + b|4>, |+/-(23)> = a|2> + b|3>; the probe couples
    // 1<->3 and 2<->4 with equal moments (set to 1).
    // <alpha(23)| mu |beta(14)> = a_alpha b_beta <2|mu|4>... expanded:
    // mu = |3><1| + |4><2| + h.c., so the amplitude is
    // b_alpha a_beta + a_alpha b_beta.
    let amp = |a: &Vector2<f64>, b: &Vector2<f64>| a[1] * b[0] + a[0] * b[1];
    let amplitude_sum =
        amp(&vp, &vp) + amp(&vp, &vm) + amp(&vm, &vp) + amp(&vm, &vm);

    DressedStates {
        energies: [pairs[0].0, pairs[1].0],
        vec_plus: [vp[0], vp[1]],
        vec_minus: [vm[0], vm[1]],
        amplitude_sum,
    }
}

/// Per-detuning contribution table of the closed-form response.
#[derive(Debug, Clone)]
pub struct DecompositionRow {
    pub delta: f64,
    pub breakdown: Option<CoherenceBreakdown>,
}

/// Samples the six contribution terms over a probe-detuning grid.
pub fn decompose_contributions(
    p: &SystemParams,
    delta_grid: &[f64],
) -> Result<Vec<DecompositionRow>> {
    p.validate()?;
    check_increasing(delta_grid)?;
    let zeroth = zeroth_order(p)?;
    let mut rows = Vec::with_capacity(delta_grid.len());
    for &d in delta_grid {
        match crate::linear_response::response_general(p, &zeroth, d - p.delta_c) {
            Ok(bd) => rows.push(DecompositionRow {
                delta: d,
                breakdown: Some(bd),
            }),
            Err(e) if e.is_pole() => rows.push(DecompositionRow {
                delta: d,
                breakdown: None,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

/// Grid argmin of n_g along the equal-G axis: scans `grid`, then refines on
/// a 10x denser local grid around the best sample. Returns (g, n_g).
pub fn equal_g_minimum(p: &SystemParams, grid: &[f64]) -> Result<(f64, f64)> {
    let samples = sweep_g(p, grid)?;
    let mut best: Option<(f64, f64)> = None;
    for s in &samples {
        if let Some(pt) = &s.point {
            if best.is_none_or(|(_, m)| pt.n_g < m) {
                best = Some((s.g1, pt.n_g));
            }
        }
    }
    let (g0, _) = best.ok_or_else(|| Error::InvalidInput("no valid sweep samples".into()))?;
    let step = if grid.len() > 1 {
        (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64
    } else {
        0.1
    };
    let mut fine_best = best.unwrap();
    let fine_step = step / 10.0;
    for k in -10..=10 {
        let g = g0 + f64::from(k) * fine_step;
        if g <= 0.0 {
            continue;
        }
        if let Ok(pt) = group_index(&p.with_equal_g(g)) {
            if pt.n_g < fine_best.1 {
                fine_best = (g, pt.n_g);
            }
        }
    }
    Ok(fine_best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_has_unit_group_index() {
        let p = SystemParams {
            n_density: 0.0,
            ..SystemParams::default()
        };
        let pt = group_index(&p).unwrap();
        assert_eq!(pt.n_g, 1.0);
        assert_eq!(pt.v_g, C_LIGHT);
        assert_eq!(pt.re_chi, 0.0);
    }

    #[test]
    fn re_chi_vanishes_at_resonance() {
        let p = SystemParams::default().with_equal_g(1.0);
        let pt = group_index(&p).unwrap();
        assert!(pt.re_chi.abs() < 1e-12, "Re chi(0) = {}", pt.re_chi);
    }

    #[test]
    fn slow_light_magnitude_at_unit_drive() {
        let p = SystemParams::default().with_equal_g(1.0);
        let pt = group_index(&p).unwrap();
        assert!((pt.n_g / 9.8e5 - 1.0).abs() < 0.1, "n_g = {}", pt.n_g);
        assert_relative_eq!(pt.v_g * pt.n_g, C_LIGHT, max_relative = 1e-12);
    }

    #[test]
    fn five_point_matches_three_point_derivative() {
        for g in [0.1, 1.0, 2.4] {
            let p = SystemParams::default().with_equal_g(g);
            let z = crate::steady_state::zeroth_order(&p).unwrap();
            let h = FD_STEP_DEFAULT;
            let s = chi_stencil(&p, &z, 0.0, h).unwrap();
            let d3 = (s[3] - s[1]) / (2.0 * h);
            let d5 = (-s[4] + 8.0 * s[3] - 8.0 * s[1] + s[0]) / (12.0 * h);
            assert!(
                ((d3 - d5) / d5).abs() < 1e-3,
                "G={g}: 3pt {d3} vs 5pt {d5}"
            );
        }
    }

    /// Natural cubic spline derivative at the central knot of a uniform
    /// grid (second derivatives from the standard tridiagonal system).
    fn spline_derivative_at_center(y: &[f64], h: f64) -> f64 {
        let n = y.len();
        let mut rhs = vec![0.0f64; n];
        for i in 1..n - 1 {
            rhs[i] = 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
        }
        // Thomas algorithm on the interior system, natural ends M[0]=M[n-1]=0
        let m_dim = n - 2;
        let mut c_prime = vec![0.0f64; m_dim];
        let mut d_prime = vec![0.0f64; m_dim];
        c_prime[0] = 1.0 / 4.0;
        d_prime[0] = rhs[1] / 4.0;
        for k in 1..m_dim {
            let denom = 4.0 - c_prime[k - 1];
            c_prime[k] = 1.0 / denom;
            d_prime[k] = (rhs[k + 1] - d_prime[k - 1]) / denom;
        }
        let mut m = vec![0.0f64; n];
        m[m_dim] = d_prime[m_dim - 1];
        for k in (1..m_dim).rev() {
            m[k] = d_prime[k - 1] - c_prime[k - 1] * m[k + 1];
        }
        let i = n / 2;
        (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0
    }

    /// The finite-difference derivative agrees with a dense-grid spline
    /// derivative within 0.1% at the reference evaluation points.
    #[test]
    fn derivative_matches_dense_spline() {
        for g in [0.1, 1.0, 2.4] {
            let p = SystemParams::default().with_equal_g(g);
            let z = crate::steady_state::zeroth_order(&p).unwrap();
            let pref = p.chi_prefactor();
            let n = 2001usize;
            let span = 0.002;
            let h = 2.0 * span / (n - 1) as f64;
            let y: Vec<f64> = (0..n)
                .map(|i| {
                    let d = -span + i as f64 * h;
                    pref * rho_pi(&p, &z, d).unwrap().re
                })
                .collect();
            let spline = spline_derivative_at_center(&y, h);
            let fd = group_index(&p).unwrap().d_re_chi_d_omega * p.gamma_si;
            assert!(
                (fd / spline - 1.0).abs() < 1e-3,
                "G={g}: fd {fd:e} vs spline {spline:e}"
            );
        }
    }

    #[test]
    fn unity_crossing_sits_at_the_dephasing_rate() {
        let p = SystemParams::default();
        let grid: Vec<f64> = (1..=40).map(|i| f64::from(i) * 0.1).collect();
        let crossings = unity_crossings(&p, SweepAxis::EqualG, &grid).unwrap();
        assert_eq!(crossings.len(), 1);
        assert!((crossings[0] - 1.5).abs() < 1e-3, "root at {}", crossings[0]);
    }

    #[test]
    fn group_index_decays_toward_unity_at_strong_drive() {
        let p = SystemParams::default();
        let n3 = group_index(&p.with_equal_g(3.0)).unwrap().n_g;
        let n8 = group_index(&p.with_equal_g(8.0)).unwrap().n_g;
        let n20 = group_index(&p.with_equal_g(20.0)).unwrap().n_g;
        assert!((n20 - 1.0).abs() < (n8 - 1.0).abs());
        assert!((n8 - 1.0).abs() < (n3 - 1.0).abs());
    }

    #[test]
    fn valley_exists_at_high_fixed_g2_only() {
        let p = SystemParams::default();
        let grid: Vec<f64> = (1..=60).map(|i| f64::from(i) * 0.1).collect();
        let high = sweep_g1(&p, &grid, 1.5).unwrap();
        assert_eq!(high.crossings.len(), 2, "crossings: {:?}", high.crossings);
        let (a, b) = high.valley.unwrap();
        assert!((a - 1.5).abs() < 0.02);
        assert!((b - 2.6).abs() < 0.05, "second crossing at {b}");
        let low = sweep_g1(&p, &grid, 1.0).unwrap();
        assert!(low.crossings.is_empty());
        for s in &low.samples {
            assert!(s.point.as_ref().unwrap().n_g > 1.0);
        }
    }

    #[test]
    fn pole_inside_stencil_advises_a_shift() {
        // no drive, no ground dephasing: delta = 0 is a 0/0 point
        let p = SystemParams::default().with_equal_g(0.0);
        match group_index(&p) {
            Err(crate::error::Error::StencilPole { delta }) => assert_eq!(delta, 0.0),
            other => panic!("expected stencil-pole error, got {other:?}"),
        }
    }

    #[test]
    fn contour_flags_the_zero_drive_corner() {
        let p = SystemParams::default();
        let grid = [0.0, 1.0];
        let contour = sweep_contour(&p, &grid, &grid).unwrap();
        assert!(contour.n_g[0][0].is_none(), "corner should be flagged");
        assert!(contour.n_g[0][1].is_some());
        assert!(contour.n_g[1][0].is_some());
        assert!(contour.n_g[1][1].is_some());
    }

    #[test]
    fn dressed_energies_and_amplitude_cancellation() {
        for g in [0.5, 1.0, 3.0] {
            let d = dressed_states(g);
            assert_relative_eq!(d.energies[0], g, max_relative = 1e-14);
            assert_relative_eq!(d.energies[1], -g, max_relative = 1e-14);
            assert!(d.amplitude_sum.abs() < 1e-14);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            assert_relative_eq!(d.vec_plus[0].abs(), s, max_relative = 1e-12);
            assert_relative_eq!(d.vec_plus[1].abs(), s, max_relative = 1e-12);
        }
        let degenerate = dressed_states(0.0);
        assert_eq!(degenerate.energies, [0.0, 0.0]);
    }

    #[test]
    fn contribution_terms_cancel_at_two_photon_resonance() {
        // Equal components, on the two-photon axis: C1 = 0 and A1 = -B1.
        for g in [0.7, 1.5, 3.0] {
            let p = SystemParams::default().with_equal_g(g);
            let rows = decompose_contributions(&p, &[0.0]).unwrap();
            let bd = rows[0].breakdown.unwrap();
            assert!(bd.c1.norm() < 1e-15, "C1 = {}", bd.c1);
            assert!((bd.a1 + bd.b1).norm() < 1e-14);
            assert!((bd.a1.im + bd.b1.im).abs() < 1e-14);
        }
    }

    #[test]
    fn gain_window_driven_by_coherence_terms() {
        // At G = 1.5 and delta near +-G the negative coherence contributions
        // outweigh the positive population term.
        let p = SystemParams::default().with_equal_g(1.5);
        let rows = decompose_contributions(&p, &[-1.5, 1.5]).unwrap();
        for row in rows {
            let bd = row.breakdown.unwrap();
            let coh = bd.b1.im + bd.c1.im;
            assert!(coh < 0.0);
            assert!(coh.abs() > bd.a1.im, "at delta = {}", row.delta);
            assert!(bd.a1.im > 0.0);
        }
    }
}
