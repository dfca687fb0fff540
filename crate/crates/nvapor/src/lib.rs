//! Linear optical response of a four-level J=1/2 <-> J=1/2 alkali system
//! driven by one linearly polarized control field.
//!
//! A weak pi-polarized probe couples |1>-|3> and |2>-|4>; the sigma
//! components of the control couple |1>-|4> (G1) and |2>-|3> (G2). The
//! crate computes:
//!
//! - the probe-free steady state ([`steady_state`]), analytically for equal
//!   control components and numerically in general;
//! - the first-order probe coherences, susceptibility, and the term-by-term
//!   contribution breakdown ([`linear_response`]);
//! - group index / group velocity, drive sweeps, unity crossings, and the
//!   dressed-state picture ([`observables`]);
//! - Maxwell-Boltzmann velocity averaging ([`doppler`]);
//! - Gaussian pulse propagation and peak delays ([`pulse`]);
//! - a CSV-emitting command-line interface ([`cli`]).
//!
//! All rates and detunings are expressed in units of the natural linewidth
//! unit gamma; SI conversions happen only at the observable boundaries
//! (susceptibility prefactor, Doppler width, pulse timing). First-order
//! quantities are reported per unit probe Rabi amplitude, so the probe
//! amplitude itself never enters the results.

pub mod cli;
pub mod constants;
pub mod density;
pub mod doppler;
pub mod error;
pub mod linear_response;
pub mod master;
pub mod observables;
pub mod params;
pub mod pulse;
pub mod steady_state;

pub use density::{DensityComponent, PropagatorFactors};
pub use doppler::{doppler_average, doppler_group_index, doppler_width, DopplerConfig};
pub use error::{Error, Result};
pub use linear_response::{
    response_equal_g, response_general, response_numeric, rho_pi, susceptibility,
    CoherenceBreakdown, ResponseSpectrum,
};
pub use observables::{
    decompose_contributions, dressed_states, group_index, sweep_contour, sweep_g, sweep_g1,
    GroupIndexPoint,
};
pub use params::{build_params, intensity_of, parse_config, SystemParams};
pub use pulse::{delay_to_group_index, propagate, PulseSpec, PulseTrace};
pub use steady_state::{zeroth_order, zeroth_order_analytic, zeroth_order_numeric, ZerothOrder};
