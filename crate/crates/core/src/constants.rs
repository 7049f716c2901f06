//! Physical constants (CODATA 2018 exact/recommended values, SI units).

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const C_LIGHT: f64 = 299_792_458.0;

pub use std::f64::consts::TAU as TWO_PI;
