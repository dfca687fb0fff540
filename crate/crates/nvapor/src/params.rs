//! System parameters, validation, config parsing, and the control-intensity
//! calibration.
//!
//! All rates and detunings are dimensionless, measured in units of `gamma`
//! (the natural linewidth unit, `gamma_si` rad/s). SI quantities appear only
//! in `n_density`, `omega_p`, `gamma_si`, and `a_einstein`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::constants::*;
use crate::error::{Error, Result};

/// Full parameter set of the four-level system.
///
/// Level labels: |1>, |2> are the ground pair, |3>, |4> the excited pair.
/// The control components drive |1>-|4> (G1) and |2>-|3> (G2); the probe
/// drives |1>-|3> and |2>-|4>.
///
/// Config-file keys use the symbol names (`gamma1`, `Gamma1`, `G1`, `Delta`,
/// `delta`, ...); see [`ACCEPTED_KEYS`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Decay rate gamma_1 = gamma_13 = gamma_24 (probe transitions), in gamma.
    pub gamma1: f64,
    /// Decay rate gamma_2 = gamma_14 = gamma_23 (control transitions), in gamma.
    pub gamma2: f64,
    /// Collisional dephasing rate, in gamma.
    pub gamma_coll: f64,
    /// Ground-excited coherence dephasing Gamma_1, in gamma.
    /// Derived as (gamma1 + gamma2)/2 + gamma_coll unless overridden.
    pub gamma_ge: f64,
    /// Ground-ground coherence dephasing Gamma_2, in gamma.
    /// Derived as gamma_coll unless overridden.
    pub gamma_gg: f64,
    /// Excited-excited coherence dephasing Gamma_3, in gamma.
    /// Derived as gamma1 + gamma2 + gamma_coll unless overridden.
    pub gamma_ee: f64,
    /// Control Rabi half-amplitude on |1>-|4>, in gamma. Complex phases are
    /// propagated through all formulas.
    pub g1: C64,
    /// Control Rabi half-amplitude on |2>-|3>, in gamma.
    pub g2: C64,
    /// Probe Rabi half-amplitude, in gamma. Formal expansion parameter only:
    /// the linear response is reported per unit probe amplitude and this
    /// field never enters the first-order results.
    pub probe_g: C64,
    /// Control detuning Delta, in gamma.
    pub delta_c: f64,
    /// Probe detuning delta, in gamma.
    pub delta_p: f64,
    /// Atomic number density N (m^-3).
    pub n_density: f64,
    /// Probe angular frequency omega_p (rad/s).
    pub omega_p: f64,
    /// The unit gamma in rad/s.
    pub gamma_si: f64,
    /// Einstein A coefficient (rad/s).
    pub a_einstein: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            gamma1: 2.0,
            gamma2: 1.0,
            gamma_coll: 0.0,
            gamma_ge: 1.5,
            gamma_gg: 0.0,
            gamma_ee: 3.0,
            g1: C64::new(1.0, 0.0),
            g2: C64::new(1.0, 0.0),
            probe_g: C64::new(0.01, 0.0),
            delta_c: 0.0,
            delta_p: 0.0,
            n_density: DEFAULT_N_DENSITY,
            omega_p: DEFAULT_OMEGA_P,
            gamma_si: DEFAULT_GAMMA_SI,
            a_einstein: DEFAULT_A_EINSTEIN,
        }
    }
}

impl SystemParams {
    /// Probe-control beat frequency omega_pc = delta - Delta, in gamma.
    pub fn omega_pc(&self) -> f64 {
        self.delta_p - self.delta_c
    }

    /// gamma1 + gamma2, the total decay rate out of either excited level.
    pub fn sum_gamma(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    /// The common amplitude when the two control components are equal to
    /// within 1e-12 relative.
    pub fn equal_g(&self) -> Option<C64> {
        let scale = self.g1.norm().max(self.g2.norm());
        if (self.g1 - self.g2).norm() <= 1e-12 * scale || scale == 0.0 {
            Some(self.g1)
        } else {
            None
        }
    }

    /// Dimensionless prefactor of the susceptibility, 3 N c^3 / (2 omega_p^3).
    pub fn chi_prefactor(&self) -> f64 {
        1.5 * self.n_density * C_LIGHT.powi(3) / self.omega_p.powi(3)
    }

    /// Returns a copy with both control amplitudes set to `g` (real).
    pub fn with_equal_g(&self, g: f64) -> Self {
        let mut p = self.clone();
        p.g1 = C64::new(g, 0.0);
        p.g2 = C64::new(g, 0.0);
        p
    }

    /// Returns a copy with the control amplitudes set to `g1`, `g2` (real).
    pub fn with_g1_g2(&self, g1: f64, g2: f64) -> Self {
        let mut p = self.clone();
        p.g1 = C64::new(g1, 0.0);
        p.g2 = C64::new(g2, 0.0);
        p
    }

    /// Checks rates, density, and SI constants.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma_coll", self.gamma_coll),
            ("Gamma1", self.gamma_ge),
            ("Gamma2", self.gamma_gg),
            ("Gamma3", self.gamma_ee),
        ];
        for (name, v) in rates {
            if !v.is_finite() {
                return Err(Error::Validation {
                    field: name.into(),
                    reason: format!("must be finite, got {v}"),
                });
            }
            if v < 0.0 {
                return Err(Error::Validation {
                    field: name.into(),
                    reason: format!("decay/dephasing rates must be >= 0, got {v}"),
                });
            }
        }
        for (name, v) in [("Delta", self.delta_c), ("delta", self.delta_p)] {
            if !v.is_finite() {
                return Err(Error::Validation {
                    field: name.into(),
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        for (name, v) in [("G1", self.g1), ("G2", self.g2), ("g", self.probe_g)] {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Validation {
                    field: name.into(),
                    reason: "must be finite".into(),
                });
            }
        }
        if !(self.n_density.is_finite() && self.n_density >= 0.0) {
            return Err(Error::Validation {
                field: "N_density".into(),
                reason: format!("must be finite and >= 0, got {}", self.n_density),
            });
        }
        for (name, v) in [
            ("omega_p", self.omega_p),
            ("gamma_SI", self.gamma_si),
            ("A_einstein", self.a_einstein),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation {
                    field: name.into(),
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Serializes to the config key-value surface (the same keys accepted by
    /// [`build_params`]). Complex amplitudes are emitted as their real parts;
    /// the config surface only carries real amplitudes.
    pub fn to_key_values(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("gamma1".into(), self.gamma1);
        m.insert("gamma2".into(), self.gamma2);
        m.insert("gamma_coll".into(), self.gamma_coll);
        m.insert("Gamma1".into(), self.gamma_ge);
        m.insert("Gamma2".into(), self.gamma_gg);
        m.insert("Gamma3".into(), self.gamma_ee);
        m.insert("G1".into(), self.g1.re);
        m.insert("G2".into(), self.g2.re);
        m.insert("g".into(), self.probe_g.re);
        m.insert("Delta".into(), self.delta_c);
        m.insert("delta".into(), self.delta_p);
        m.insert("N_density".into(), self.n_density);
        m.insert("omega_p".into(), self.omega_p);
        m.insert("gamma_SI".into(), self.gamma_si);
        m.insert("A_einstein".into(), self.a_einstein);
        m
    }
}

/// Keys accepted by [`build_params`] and the config file.
pub const ACCEPTED_KEYS: [&str; 15] = [
    "gamma1",
    "gamma2",
    "gamma_coll",
    "Gamma1",
    "Gamma2",
    "Gamma3",
    "G1",
    "G2",
    "g",
    "Delta",
    "delta",
    "N_density",
    "omega_p",
    "gamma_SI",
    "A_einstein",
];

/// Builds a parameter set from a key-value map, deriving the dephasing rates
/// from `gamma1`, `gamma2`, `gamma_coll` unless they are overridden
/// explicitly.
pub fn build_params(map: &BTreeMap<String, f64>) -> Result<SystemParams> {
    for key in map.keys() {
        if !ACCEPTED_KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey {
                key: key.clone(),
                accepted: ACCEPTED_KEYS.join(", "),
            });
        }
    }
    let mut p = SystemParams::default();
    let get = |k: &str| map.get(k).copied();
    if let Some(v) = get("gamma1") {
        p.gamma1 = v;
    }
    if let Some(v) = get("gamma2") {
        p.gamma2 = v;
    }
    if let Some(v) = get("gamma_coll") {
        p.gamma_coll = v;
    }
    // Derived dephasings, then explicit overrides.
    p.gamma_ge = 0.5 * (p.gamma1 + p.gamma2) + p.gamma_coll;
    p.gamma_gg = p.gamma_coll;
    p.gamma_ee = (p.gamma1 + p.gamma2) + p.gamma_coll;
    if let Some(v) = get("Gamma1") {
        p.gamma_ge = v;
    }
    if let Some(v) = get("Gamma2") {
        p.gamma_gg = v;
    }
    if let Some(v) = get("Gamma3") {
        p.gamma_ee = v;
    }
    if let Some(v) = get("G1") {
        p.g1 = C64::new(v, 0.0);
    }
    if let Some(v) = get("G2") {
        p.g2 = C64::new(v, 0.0);
    }
    if let Some(v) = get("g") {
        p.probe_g = C64::new(v, 0.0);
    }
    if let Some(v) = get("Delta") {
        p.delta_c = v;
    }
    if let Some(v) = get("delta") {
        p.delta_p = v;
    }
    if let Some(v) = get("N_density") {
        p.n_density = v;
    }
    if let Some(v) = get("omega_p") {
        p.omega_p = v;
    }
    if let Some(v) = get("gamma_SI") {
        p.gamma_si = v;
    }
    if let Some(v) = get("A_einstein") {
        p.a_einstein = v;
    }
    p.validate()?;
    if p.n_density <= 0.0 {
        return Err(Error::Validation {
            field: "N_density".into(),
            reason: format!("must be > 0, got {}", p.n_density),
        });
    }
    Ok(p)
}

/// Parses the flat `key = value` config format. `#` starts a comment; blank
/// lines are skipped; the last assignment of a repeated key wins.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
            line: i + 1,
            text: raw.trim().into(),
        })?;
        let value: f64 = value.trim().parse().map_err(|_| Error::ConfigSyntax {
            line: i + 1,
            text: raw.trim().into(),
        })?;
        map.insert(key.trim().to_string(), value);
    }
    Ok(map)
}

/// Control intensity in mW/cm^2 for a real Rabi half-amplitude `g_over_gamma`.
///
/// The law is exactly quadratic, I = 1.66 (G/gamma)^2, anchored at
/// G = 0.5 gamma <-> 0.415 mW/cm^2; e.g. G = 1.5 gamma maps to 3.735 mW/cm^2.
pub fn intensity_of(g_over_gamma: f64) -> f64 {
    INTENSITY_COEFF * g_over_gamma * g_over_gamma
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn defaults_satisfy_dephasing_identities() {
        let p = SystemParams::default();
        assert_eq!(p.gamma1, 2.0);
        assert_eq!(p.gamma2, 1.0);
        assert_eq!(p.gamma_ge, 0.5 * (p.gamma1 + p.gamma2) + p.gamma_coll);
        assert_eq!(p.gamma_gg, p.gamma_coll);
        assert_eq!(p.gamma_ee, p.gamma1 + p.gamma2 + p.gamma_coll);
        assert_eq!(p.gamma_si * 6.0, p.a_einstein);
    }

    #[test]
    fn build_defaults() {
        let p = build_params(&BTreeMap::new()).unwrap();
        assert_eq!(p.gamma1, 2.0);
        assert_eq!(p.gamma2, 1.0);
        assert_eq!(p.gamma_ge, 1.5);
        assert_eq!(p.gamma_gg, 0.0);
        assert_eq!(p.gamma_ee, 3.0);
    }

    #[test]
    fn build_with_collisions() {
        let mut m = BTreeMap::new();
        m.insert("gamma_coll".to_string(), 0.5);
        let p = build_params(&m).unwrap();
        assert_relative_eq!(p.gamma_gg, 0.5);
        assert_relative_eq!(p.gamma_ge, 2.0);
        assert_relative_eq!(p.gamma_ee, 3.5);
    }

    #[test]
    fn negative_rate_rejected_by_name() {
        let mut m = BTreeMap::new();
        m.insert("gamma1".to_string(), -1.0);
        let err = build_params(&m).unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "gamma1"),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn unknown_key_lists_accepted() {
        let mut m = BTreeMap::new();
        m.insert("bogus".to_string(), 1.0);
        let err = build_params(&m).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus"));
        assert!(msg.contains("gamma_coll"));
        assert!(msg.contains("N_density"));
    }

    #[test]
    fn dephasing_override_wins() {
        let mut m = BTreeMap::new();
        m.insert("Gamma2".to_string(), 0.25);
        let p = build_params(&m).unwrap();
        assert_eq!(p.gamma_gg, 0.25);
        assert_eq!(p.gamma_ge, 1.5);
    }

    #[test]
    fn config_roundtrip_and_comments() {
        let text = "# control\nG1 = 1.5\nG2=1.5\ngamma_coll = 0.1  # inline\n\nDelta = -2.0\n";
        let map = parse_config(text).unwrap();
        assert_eq!(map.len(), 4);
        let p = build_params(&map).unwrap();
        assert_eq!(p.g1.re, 1.5);
        assert_eq!(p.delta_c, -2.0);
        assert_relative_eq!(p.gamma_ge, 1.6);
    }

    #[test]
    fn config_bad_line_reports_position() {
        let err = parse_config("G1 = 1.0\nnot a pair\n").unwrap_err();
        match err {
            Error::ConfigSyntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn intensity_anchor_points() {
        assert_relative_eq!(intensity_of(0.5), 0.415, max_relative = 1e-15);
        assert!((intensity_of(2.4) - 9.56).abs() < 5e-3);
        assert_relative_eq!(intensity_of(1.0), 1.66, max_relative = 1e-15);
        assert_relative_eq!(intensity_of(2.0), 6.64, max_relative = 1e-15);
        assert_eq!(intensity_of(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn intensity_is_exactly_quadratic(g in 0.0f64..50.0) {
            let four = intensity_of(2.0 * g);
            let one = intensity_of(g);
            prop_assert!((four - 4.0 * one).abs() <= 1e-12 * four.max(1e-300));
        }
    }

    /// Everything in the crate is plain immutable data; sweeps share it
    /// across threads.
    #[test]
    fn core_types_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<SystemParams>();
        check::<crate::density::DensityComponent>();
        check::<crate::density::PropagatorFactors>();
        check::<crate::steady_state::ZerothOrder>();
        check::<crate::linear_response::ResponseSpectrum>();
        check::<crate::observables::GroupIndexPoint>();
        check::<crate::doppler::DopplerConfig>();
        check::<crate::pulse::PulseTrace>();
    }

    #[test]
    fn key_value_echo_rebuilds_identically() {
        let mut m = BTreeMap::new();
        m.insert("G1".to_string(), 2.5);
        m.insert("Delta".to_string(), 0.7);
        let p = build_params(&m).unwrap();
        let p2 = build_params(&p.to_key_values()).unwrap();
        assert_eq!(p, p2);
    }
}
