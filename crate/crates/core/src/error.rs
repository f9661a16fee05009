use std::io;

use thiserror::Error;

/// Errors raised by the simulation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation number {0} must be even")]
    OddTruncation(usize),
    #[error("truncation number {0} is below the minimum of 6")]
    TruncationTooSmall(usize),
    #[error("grid with {points} nodes exceeds the memory cap of {cap} nodes")]
    MemoryCapExceeded { points: u128, cap: usize },
    #[error("invalid grid shape: {0}")]
    InvalidGrid(String),
    #[error("index {index} out of range on axis {axis} (max {max})")]
    IndexOutOfRange { axis: usize, index: usize, max: usize },
    #[error("cannot normalize the zero state")]
    ZeroState,
    #[error("wave function is in the wrong representation for this operation")]
    RepresentationMismatch,
    #[error("amplitude buffer length {actual} does not match grid size {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("bad snapshot magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("snapshot version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("snapshot truncated: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: u64, found: u64 },
    #[error("corrupt snapshot header: {0}")]
    CorruptHeader(String),
    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("invalid tolerance {0}: expected a value in (0, 2]")]
    InvalidTolerance(f64),
    #[error("spectral error bound diverges: delta {delta} >= {norm}")]
    BoundDiverges { delta: f64, norm: f64 },

    #[error("potential evaluation failed: {0}")]
    PotentialEvalFailure(String),
    #[error("potential returned a non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("potential requires 3 spatial dimensions, got coordinate vector of length {0}")]
    DimensionNot3(usize),
    #[error("non-finite max-norm while building the rescaled clock at t = {0}")]
    NonFiniteNorm(f64),
    #[error("rescaled clock is not strictly increasing")]
    ClockNotMonotone,
    #[error("dense reference limited to {cap} states, grid has {points}")]
    TooLargeForDense { points: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Gaussian packet with width {r0} is not resolved by grid spacing {spacing}")]
    PacketUnresolved { r0: f64, spacing: f64 },
    #[error("argument `{0}` must be positive")]
    NonPositiveArg(&'static str),
    #[error("position distribution is degenerate and cannot be sampled")]
    SamplingDegenerate,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
