//! Simulator and analysis toolkit for a two-cavity torsional optomechanical
//! "photon see-saw".
//!
//! Two photonic cavities sit on either side of a suspended nanobeam. They are
//! weakly coupled to each other (rate `kappa`) and dispersively coupled to the
//! beam's torsional mode with opposite signs, so a rotation red-shifts one
//! cavity while blue-shifting the other. The crate covers:
//!
//! * [`params`]: the device description, validation and derived constants,
//! * [`optics`]: quasi-static coupled-mode solutions and transmission,
//! * [`mechanics`]: the torsional/flapping modes, optical and Brownian torque,
//! * [`thermal`]: a lumped two-compartment thermo-optic channel,
//! * [`dynamics`]: time-domain integrators, backaction rates and limit cycles,
//! * [`analysis`]: spectra, ring-down fits, stroboscopic reconstruction and
//!   photon-shuttling statistics,
//! * [`config`] and [`experiments`]: the key-value config format and the
//!   named scenarios driven by the `seesaw` binary.

pub mod analysis;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod mechanics;
pub mod optics;
pub mod params;
pub mod thermal;

pub use error::{Error, Result};
pub use params::{Cavity, DeviceParams, PerCavity};
