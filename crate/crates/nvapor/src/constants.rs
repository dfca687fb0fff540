//! Physical constants and default model parameters.
//!
//! Internal frequency unit is the natural linewidth `gamma`; SI enters only
//! through the conversion constants collected here.

use std::f64::consts::TAU;

/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 2.997_924_58e8;

/// Boltzmann constant (J/K).
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// Atomic mass unit (kg).
pub const ATOMIC_MASS_KG: f64 = 1.660_539_068_92e-27;

/// Mass of a potassium-39 atom (kg).
pub const MASS_K39_KG: f64 = 38.963_706_486_4 * ATOMIC_MASS_KG;

/// D1-line wavelength of potassium-39 (m). The probe frequency default is
/// derived from this value; the model itself never fixes the wavelength.
pub const LAMBDA_D1_K39: f64 = 770.108e-9;

/// Einstein A coefficient of the resolved excited manifold (rad/s).
pub const DEFAULT_A_EINSTEIN: f64 = TAU * 6.079e6;

/// The unit `gamma` in rad/s, defined as A/6 so that the `gamma*6 == A`
/// identity holds exactly (numerically 2*pi*1.0132 MHz).
pub const DEFAULT_GAMMA_SI: f64 = DEFAULT_A_EINSTEIN / 6.0;

/// Default probe angular frequency (rad/s), from the D1 wavelength.
pub const DEFAULT_OMEGA_P: f64 = TAU * C_LIGHT / LAMBDA_D1_K39;

/// Default atomic number density (m^-3), i.e. 10^12 cm^-3.
pub const DEFAULT_N_DENSITY: f64 = 1e18;

/// Control-intensity calibration: I = `INTENSITY_COEFF` * (G/gamma)^2 in
/// mW/cm^2, fixed so that G = 0.5 gamma maps to 0.415 mW/cm^2.
pub const INTENSITY_COEFF: f64 = 1.66;

/// Room temperature used for Doppler-width defaults (K).
pub const ROOM_TEMPERATURE_K: f64 = 300.0;
