//! Shared-memory-parallel 3D nonuniform FFT (Type 1 and Type 2) with
//! exponential-of-semicircle window spreading, a pruned Cooley-Tukey FFT for
//! 2x oversampling, simulated multi-rank domain decomposition with halo
//! exchange, and a Particle-in-Fourier Landau-damping mini-app.

pub mod bench;
pub mod cli;
pub mod decomp;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod oracle;
pub mod pif;
pub mod pipeline;
pub mod points;
pub mod specfft;
pub mod spread;
pub mod window;

pub use error::{Error, Result};
