//! Adiabatic placement: map the Ising linear terms onto per-site final
//! detunings, sweep a triangular Ω against linearly ramped local Δᵢ, and
//! report the cheapest sampled bitstring.
//!
//! The detuning map sends density-unit Γ straight to rad/s: each site is
//! mean-centered against its blockade neighborhood and the result rescaled
//! so the largest magnitude hits `delta_max`. That rescale is the entire
//! unit bridge — no other physical conversion is applied.

use serde::{Deserialize, Serialize};

use crate::emulator::{self, NoiseModel, SampleHistogram};
use crate::ising::{extract_placement, min_cost_bitstring, Placement, PlacementProblem};
use crate::pulse::{PulseProgram, Waveform, DEFAULT_DELTA_MAX, DEFAULT_DURATION, DEFAULT_OMEGA_MAX};
use crate::register::{blockade_graph, BlockadeGraph, Register};
use crate::{Error, Result};

/// Shape of one local-detuning adiabatic sweep: Ω rises triangularly from 0
/// to `omega_max` at T/2 and back to 0; every Δᵢ ramps linearly from −`c` up
/// to `final_deltas[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSchedule {
    /// Sweep duration T, seconds.
    pub duration: f64,
    /// Peak Rabi frequency, rad/s.
    pub omega_max: f64,
    /// Magnitude of the shared initial detuning −c, rad/s.
    pub c: f64,
    /// Rescale target for the detuning map, rad/s.
    pub delta_max: f64,
    /// Δᵢ(T) per qubit, rad/s; each within ±`delta_max`.
    pub final_deltas: Vec<f64>,
}

impl AdiabaticSchedule {
    /// Published defaults: T = 4 µs, Ω_max = 2π·2 MHz, c = Δ_max = 2π·4 MHz.
    pub fn standard(final_deltas: Vec<f64>) -> Result<Self> {
        let schedule = Self {
            duration: DEFAULT_DURATION,
            omega_max: DEFAULT_OMEGA_MAX,
            c: DEFAULT_DELTA_MAX,
            delta_max: DEFAULT_DELTA_MAX,
            final_deltas,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Map a problem's Γ onto final detunings through the register's
    /// blockade graph, keeping this schedule's knobs.
    pub fn for_problem(&self, problem: &PlacementProblem, register: &Register) -> Result<Self> {
        if problem.len() != register.len() {
            return Err(Error::Problem(format!(
                "problem has {} sites, register {}",
                problem.len(),
                register.len()
            )));
        }
        let graph = blockade_graph(register, register.blockade_radius())?;
        let final_deltas = map_detunings(problem.gamma(), &graph, self.delta_max);
        let schedule = Self {
            final_deltas,
            ..self.clone()
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::Pulse(format!(
                "schedule duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.omega_max > 0.0) || !self.omega_max.is_finite() {
            return Err(Error::Pulse(format!(
                "peak Ω must be positive, got {}",
                self.omega_max
            )));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::Pulse(format!(
                "initial detuning magnitude c must be positive, got {}",
                self.c
            )));
        }
        if !(self.delta_max > 0.0) || !self.delta_max.is_finite() {
            return Err(Error::Pulse(format!(
                "delta_max must be positive, got {}",
                self.delta_max
            )));
        }
        if self.final_deltas.is_empty() {
            return Err(Error::Pulse("schedule drives no qubits".into()));
        }
        for (i, &d) in self.final_deltas.iter().enumerate() {
            if !d.is_finite() || d.abs() > self.delta_max * (1.0 + 1e-12) {
                return Err(Error::Pulse(format!(
                    "final detuning {i} = {d} outside ±{}",
                    self.delta_max
                )));
            }
        }
        Ok(())
    }
}

/// Per-site final detunings from the Ising linear terms: mean-center each Γᵢ
/// against its blockade neighborhood (Δ̃ᵢ = Γᵢ − mean_{j∈N(i)} Γⱼ, with
/// Δ̃ᵢ = Γᵢ when N(i) is empty), then rescale so max|Δ̃| = `delta_max`.
/// When every Δ̃ vanishes — all Γ equal on a connected graph — all detunings
/// are 0 rather than dividing by zero.
///
/// Panics if `gamma` and `graph` disagree on the site count or
/// `delta_max ≤ 0` (contract preconditions).
pub fn map_detunings(gamma: &[f64], graph: &BlockadeGraph, delta_max: f64) -> Vec<f64> {
    assert_eq!(
        gamma.len(),
        graph.node_count(),
        "one Γ per blockade-graph node"
    );
    assert!(delta_max > 0.0, "delta_max must be positive");

    let centered: Vec<f64> = (0..gamma.len())
        .map(|i| {
            let neighbors = graph.neighbors(i);
            if neighbors.is_empty() {
                gamma[i]
            } else {
                let mean = neighbors.iter().map(|&j| gamma[j]).sum::<f64>()
                    / neighbors.len() as f64;
                gamma[i] - mean
            }
        })
        .collect();

    let peak = centered.iter().map(|d| d.abs()).fold(0.0, f64::max);
    // Mean-centering equal Γ leaves roundoff crumbs (sum/k is inexact);
    // treat anything at rounding scale as the degenerate all-zero case.
    let zero_floor = 1e-12 * (1.0 + gamma.iter().map(|g| g.abs()).fold(0.0, f64::max));
    if peak <= zero_floor {
        return vec![0.0; gamma.len()];
    }
    centered.iter().map(|d| d * delta_max / peak).collect()
}

/// Realize a schedule as a local-mode pulse program.
pub fn build_adiabatic_pulse(schedule: &AdiabaticSchedule) -> Result<PulseProgram> {
    schedule.validate()?;
    let t = schedule.duration;
    let omega = Waveform::new(vec![
        (0.0, 0.0),
        (0.5 * t, schedule.omega_max),
        (t, 0.0),
    ])?;
    let deltas = schedule
        .final_deltas
        .iter()
        .map(|&d| Waveform::ramp(-schedule.c, d, t))
        .collect::<Result<Vec<_>>>()?;
    PulseProgram::local(omega, deltas)
}

/// Outcome of one adiabatic run: the full histogram plus the cheapest
/// sampled bitstring as a placement (the flagged winner).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaeOutcome {
    pub placement: Placement,
    pub histogram: SampleHistogram,
}

impl QaeOutcome {
    /// The winning bitstring — always the minimum-cost histogram key.
    pub fn winner(&self) -> &crate::ising::Bitstring {
        &self.placement.bitstring
    }
}

/// Run the adiabatic algorithm: derive final detunings from the problem's Γ
/// (through the register's blockade graph and `schedule.delta_max` — the
/// schedule's own `final_deltas` are recomputed), evolve, sample `shots`
/// times, and return the cheapest sampled bitstring with the histogram.
///
/// Noise: dynamic sources switch the run to per-shot trajectories;
/// detection-only models sample one noiseless evolution.
pub fn run_qae(
    problem: &PlacementProblem,
    register: &Register,
    schedule: &AdiabaticSchedule,
    shots: u64,
    noise: &NoiseModel,
) -> Result<QaeOutcome> {
    let schedule = schedule.for_problem(problem, register)?;
    let pulse = build_adiabatic_pulse(&schedule)?;
    let dt = emulator::max_dt(
        pulse.omega_max_abs(),
        pulse.delta_max_abs(),
        register.max_interaction(),
    );

    let histogram = if noise.has_dynamic_noise() {
        emulator::sample_trajectories(register, &pulse, dt, shots, noise)?
    } else {
        let state = emulator::evolve(register, &pulse, dt)?;
        emulator::sample(&state, shots, noise)?
    };

    let (winner, _cost) = min_cost_bitstring(problem, histogram.counts().keys())?
        .expect("histogram holds at least one bitstring");
    let placement = extract_placement(problem, &winner, None)?;
    Ok(QaeOutcome {
        placement,
        histogram,
    })
}
