//! Convert a continuous scalar density into a constrained Ising placement
//! problem and solve it on an emulated neutral-atom (Rydberg) quantum machine.
//!
//! The intended pipeline, end to end:
//!
//! 1. [`field`] — ingest or synthesize a density `g(r)` on a regular grid,
//!    slice a 3D volume into 2D planes, smooth, and normalize so `∫g = 1`.
//! 2. [`register`] — place qubit sites over high-density regions, fit them to
//!    a physical trap layout, and derive the blockade graph.
//! 3. [`ising`] — expand the L² distance between `g` and a sum of Gaussians
//!    switched on/off per site into an Ising cost
//!    `−Σᵢ Γᵢnᵢ + Σ_{i≠j} Vᵢⱼnᵢnⱼ`, with exact classical solvers as oracles.
//! 4. [`pulse`] — piecewise-linear laser controls `Ω(t)`, `Δᵢ(t)`.
//! 5. [`emulator`] — full state-vector propagation of the Rydberg
//!    Hamiltonian, a calibrated noise model, and measurement sampling.
//! 6. [`qae`] — adiabatic schedule with per-site detunings mapped from the
//!    linear Ising coefficients; minimal-cost bitstring selection.
//! 7. [`vqa`] — Bayesian (Gaussian-process) optimization of global pulse
//!    parameters against the sampled cost.
//!
//! Conventions used throughout (documented once, relied on everywhere):
//!
//! - **Units.** Angular frequencies are `rad/s`; times are seconds; register
//!   coordinates are micrometres; density grids carry their own length unit
//!   (ångström for solvent densities) and only the register's `grid_frame`
//!   bridges the two.
//! - **Hamiltonian.** `H(t) = Σᵢ Ωᵢ(t)σ̂ˣᵢ − Σᵢ Δᵢ(t)n̂ᵢ + Σ_{i<j} Uᵢⱼn̂ᵢn̂ⱼ`
//!   with `Uᵢⱼ = C₆/|rᵢⱼ|⁶`. The σ̂ˣ coefficient is `Ω`, *not* `Ω/2`; a
//!   resonant π-flip therefore takes `Ω·t = π/2`. Hardware data sheets often
//!   use the other convention — see [`emulator`] for the fine print.
//! - **Basis ordering.** Bit `i` of a basis-state index is the occupation
//!   `nᵢ` of site `i`, so site 0 is the least-significant bit.
//!
//! Everything is deterministic given its seed: stochastic code derives one
//! counter-mode RNG stream per shot, so results are identical at any thread
//! count.

pub mod emulator;
pub mod field;
pub mod ising;
mod linalg;
mod numerics;
pub mod pulse;
pub mod qae;
pub mod register;
pub mod vqa;

pub use emulator::{NoiseModel, QuantumState, SampleHistogram};
pub use field::{GaussianComponent, GridFormat, ScalarField};
pub use ising::{Bitstring, Placement, PlacementProblem};
pub use pulse::{PulseProgram, Waveform};
pub use qae::{AdiabaticSchedule, QaeOutcome};
pub use register::{BlockadeGraph, Register};
pub use vqa::{OptimizerConfig, VqaOutcome};

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A grid/JSON file failed to parse; `line` is 1-based.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    /// A scalar field violated a structural invariant.
    #[error("invalid grid: {0}")]
    Grid(String),
    /// A register violated a structural invariant.
    #[error("invalid register: {0}")]
    Register(String),
    /// A placement problem violated a structural invariant or precondition.
    #[error("invalid problem: {0}")]
    Problem(String),
    /// A waveform or pulse program violated a structural invariant.
    #[error("invalid pulse: {0}")]
    Pulse(String),
    /// A bitstring's length does not match the object it is evaluated on.
    #[error("bitstring has {got} bits, expected {expected}")]
    BitstringLength { expected: usize, got: usize },
    /// The emulator rejected its inputs (qubit ceiling, step size, …).
    #[error("emulator: {0}")]
    Emulator(String),
    /// The optimizer rejected its configuration.
    #[error("optimizer: {0}")]
    Optimizer(String),
    /// The optimization objective itself failed mid-run.
    #[error("objective failed after {completed} completed cycles: {source}")]
    ObjectiveAborted {
        completed: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
