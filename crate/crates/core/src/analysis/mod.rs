//! Post-processing of simulated traces.

pub mod ringdown;
pub mod shuttle;
pub mod spectrum;
pub mod strobo;

pub use ringdown::{ringdown_fit, RingdownFit};
pub use shuttle::{count_shuttled_photons, detuning_trajectory, ShuttleOptions, ShuttleStats};
pub use spectrum::{fft_spectrum, series_spectrum, Spectrum, Window};
pub use strobo::{strobo_reconstruct, trajectories_cross, Reconstruction, Trace};
