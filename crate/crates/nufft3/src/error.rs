//! Error type shared across the crate.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("tolerance {0:e} outside supported range [1e-12, 1e-1]")]
    ToleranceRange(f64),

    #[error("window transform fell below positivity floor at kappa={kappa}: beta/width inconsistent with mode count")]
    PhiHatUnderflow { kappa: f64 },

    #[error("position {0:?} outside [0, L)^d")]
    PositionOutOfDomain([f64; 3]),

    #[error("non-finite strength at particle {0}")]
    NonFiniteStrength(usize),

    #[error("grid/window mismatch: {0}")]
    GridMismatch(String),

    #[error("halo cells are stale; run halo fill before interpolation")]
    StaleHalo,

    #[error("morton cell index {index} does not fit in {bits} bits")]
    MortonOverflow { index: u64, bits: u32 },

    #[error("pruned FFT requires M = 2N, got M={m}, N={n}")]
    PrunedSize { m: usize, n: usize },

    #[error("oracle cost {cost} exceeds cap {cap}")]
    CostCapExceeded { cost: u64, cap: u64 },

    #[error("invalid tiling: {0}")]
    TileExtent(String),

    #[error("invalid rank grid: {0}")]
    RankGrid(String),

    #[error("halo message mismatch: {0}")]
    MessageMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
