//! Time-dependent laser controls: piecewise-linear waveforms and per-qubit
//! or global pulse programs.
//!
//! Angular frequencies are rad/s and times are seconds throughout. The
//! default hardware envelope (peak Rabi 2π×2 MHz, detuning span 2π×4 MHz,
//! 4 µs programs) matches publicly documented neutral-atom machines and is
//! configurable everywhere it is used.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default peak Rabi frequency Ω_max = 2π × 2 MHz (rad/s).
pub const DEFAULT_OMEGA_MAX: f64 = 2.0 * std::f64::consts::PI * 2.0e6;

/// Default detuning magnitude Δ_max = 2π × 4 MHz (rad/s).
pub const DEFAULT_DELTA_MAX: f64 = 2.0 * std::f64::consts::PI * 4.0e6;

/// Default pulse duration T = 4 µs.
pub const DEFAULT_DURATION: f64 = 4.0e-6;

/// Piecewise-linear control: `(time, value)` knots with strictly increasing
/// times from 0 to the duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct Waveform {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for Waveform {
    type Error = Error;
    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        Waveform::new(knots)
    }
}

impl From<Waveform> for Vec<(f64, f64)> {
    fn from(w: Waveform) -> Self {
        w.knots
    }
}

impl Waveform {
    /// Build a waveform, checking the knot invariants.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Pulse(format!(
                "waveform needs at least 2 knots, got {}",
                knots.len()
            )));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::Pulse(format!(
                "waveform must start at t = 0, got {}",
                knots[0].0
            )));
        }
        for pair in knots.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::Pulse(format!(
                    "knot times must be strictly increasing, got {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some(&(t, v)) = knots.iter().find(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Pulse(format!("non-finite knot ({t}, {v})")));
        }
        Ok(Self { knots })
    }

    /// Constant value over `[0, duration]`.
    pub fn constant(value: f64, duration: f64) -> Result<Self> {
        Self::new(vec![(0.0, value), (duration, value)])
    }

    /// Linear ramp from `from` at t = 0 to `to` at `duration`.
    pub fn ramp(from: f64, to: f64, duration: f64) -> Result<Self> {
        Self::new(vec![(0.0, from), (duration, to)])
    }

    /// The knots, in time order.
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// End time of the waveform.
    pub fn duration(&self) -> f64 {
        self.knots.last().unwrap().0
    }

    /// Linear interpolation between the bracketing knots. Errors outside
    /// `[0, duration]`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let duration = self.duration();
        if !(0.0..=duration).contains(&t) {
            return Err(Error::Pulse(format!(
                "t = {t} outside the waveform domain [0, {duration}]"
            )));
        }
        // Find the segment with knot_time ≤ t < next_time (last knot maps to
        // the final segment so evaluate(T) is exact).
        let idx = match self
            .knots
            .binary_search_by(|(kt, _)| kt.partial_cmp(&t).unwrap())
        {
            Ok(i) => return Ok(self.knots[i].1),
            Err(i) => i - 1, // i ≥ 1 because knots[0].0 = 0 ≤ t
        };
        let (t0, v0) = self.knots[idx];
        let (t1, v1) = self.knots[idx + 1];
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    /// Largest absolute knot value (piecewise-linear ⇒ extremes at knots).
    pub fn max_abs(&self) -> f64 {
        self.knots.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }

    fn min_value(&self) -> f64 {
        self.knots
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Whether a program addresses qubits individually or as one ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseMode {
    /// One shared Ω, per-qubit Δᵢ.
    Local,
    /// One Ω, one Δ for every qubit.
    Global,
}

/// A complete laser program over `[0, T]`.
///
/// In `Global` mode a single (Ω, Δ) pair drives every qubit; in `Local` mode
/// the Rabi drive is still shared but each qubit gets its own detuning
/// waveform. Ω must be non-negative everywhere (it is an amplitude).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProgram", into = "RawProgram")]
pub struct PulseProgram {
    duration: f64,
    mode: PulseMode,
    omega: Waveform,
    deltas: Vec<Waveform>,
}

#[derive(Serialize, Deserialize)]
struct RawProgram {
    duration: f64,
    mode: PulseMode,
    omega: Waveform,
    deltas: Vec<Waveform>,
}

impl TryFrom<RawProgram> for PulseProgram {
    type Error = Error;
    fn try_from(raw: RawProgram) -> Result<Self> {
        match raw.mode {
            PulseMode::Global => {
                if raw.deltas.len() != 1 {
                    return Err(Error::Pulse(format!(
                        "global program needs exactly 1 delta waveform, got {}",
                        raw.deltas.len()
                    )));
                }
                PulseProgram::global(raw.omega, raw.deltas.into_iter().next().unwrap())
            }
            PulseMode::Local => {
                PulseProgram::local(raw.omega, raw.deltas)
            }
        }
    }
}

impl From<PulseProgram> for RawProgram {
    fn from(p: PulseProgram) -> Self {
        RawProgram {
            duration: p.duration,
            mode: p.mode,
            omega: p.omega,
            deltas: p.deltas,
        }
    }
}

impl PulseProgram {
    /// One Ω and one Δ shared by all qubits.
    pub fn global(omega: Waveform, delta: Waveform) -> Result<Self> {
        Self::build(PulseMode::Global, omega, vec![delta])
    }

    /// Shared Ω with one Δᵢ per qubit (`deltas.len()` = qubit count).
    pub fn local(omega: Waveform, deltas: Vec<Waveform>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::Pulse("local program needs at least one delta".into()));
        }
        Self::build(PulseMode::Local, omega, deltas)
    }

    fn build(mode: PulseMode, omega: Waveform, deltas: Vec<Waveform>) -> Result<Self> {
        let duration = omega.duration();
        if omega.min_value() < 0.0 {
            return Err(Error::Pulse(format!(
                "Ω must be non-negative everywhere, minimum knot is {}",
                omega.min_value()
            )));
        }
        for (i, d) in deltas.iter().enumerate() {
            if d.duration() != duration {
                return Err(Error::Pulse(format!(
                    "delta waveform {i} ends at {} but Ω ends at {duration}",
                    d.duration()
                )));
            }
        }
        Ok(Self {
            duration,
            mode,
            omega,
            deltas,
        })
    }

    /// Program duration T in seconds.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Addressing mode.
    pub fn mode(&self) -> PulseMode {
        self.mode
    }

    /// The shared Rabi waveform.
    pub fn omega(&self) -> &Waveform {
        &self.omega
    }

    /// Detuning waveforms (one in global mode, one per qubit in local mode).
    pub fn deltas(&self) -> &[Waveform] {
        &self.deltas
    }

    /// Ω at time `t` for qubit `i` (shared, so `i` is ignored today; kept in
    /// the signature so per-qubit drives stay a local change).
    pub fn omega_at(&self, _i: usize, t: f64) -> Result<f64> {
        self.omega.evaluate(t)
    }

    /// Δᵢ at time `t`.
    pub fn delta_at(&self, i: usize, t: f64) -> Result<f64> {
        match self.mode {
            PulseMode::Global => self.deltas[0].evaluate(t),
            PulseMode::Local => self
                .deltas
                .get(i)
                .ok_or_else(|| {
                    Error::Pulse(format!(
                        "qubit {i} out of range for {} local deltas",
                        self.deltas.len()
                    ))
                })?
                .evaluate(t),
        }
    }

    /// Number of delta channels (= qubit count in local mode).
    pub fn delta_channels(&self) -> usize {
        self.deltas.len()
    }

    /// Largest |Ω| over the program.
    pub fn omega_max_abs(&self) -> f64 {
        self.omega.max_abs()
    }

    /// Largest |Δᵢ| over channels and time.
    pub fn delta_max_abs(&self) -> f64 {
        self.deltas.iter().map(Waveform::max_abs).fold(0.0, f64::max)
    }
}

/// Parameter boxes for [`parametrized_pulse`]: Ω points live in
/// `[0, omega_max]`, Δ points in `[−delta_max, delta_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseBounds {
    pub omega_max: f64,
    pub delta_max: f64,
}

impl Default for PulseBounds {
    fn default() -> Self {
        Self {
            omega_max: DEFAULT_OMEGA_MAX,
            delta_max: DEFAULT_DELTA_MAX,
        }
    }
}

/// Build a global program from `m` control values per channel.
///
/// Δ knots sit at the `m` inclusive equispaced times `j·T/(m−1)`. Ω knots sit
/// at the `m` *interior* times `(j+1)·T/(m+1)` with zero knots prepended and
/// appended, so `Ω(0) = Ω(T) = 0` — a hardware-realistic rise/fall. With
/// `m = 3` and all points at `omega_max` that is the trapezoid
/// `0 → Ω_max → Ω_max → Ω_max → 0`.
pub fn parametrized_pulse(
    omega_params: &[f64],
    delta_params: &[f64],
    duration: f64,
    bounds: &PulseBounds,
) -> Result<PulseProgram> {
    let m = omega_params.len();
    if m < 2 {
        return Err(Error::Pulse(format!(
            "need at least 2 control points per channel, got {m}"
        )));
    }
    if delta_params.len() != m {
        return Err(Error::Pulse(format!(
            "channel size mismatch: {m} Ω points vs {} Δ points",
            delta_params.len()
        )));
    }
    if !(duration > 0.0) {
        return Err(Error::Pulse(format!("duration must be positive, got {duration}")));
    }
    for (j, &w) in omega_params.iter().enumerate() {
        if !(0.0..=bounds.omega_max).contains(&w) {
            return Err(Error::Pulse(format!(
                "Ω point {j} = {w} outside [0, {}]",
                bounds.omega_max
            )));
        }
    }
    for (j, &d) in delta_params.iter().enumerate() {
        if d.abs() > bounds.delta_max {
            return Err(Error::Pulse(format!(
                "Δ point {j} = {d} outside ±{}",
                bounds.delta_max
            )));
        }
    }

    let mut omega_knots = Vec::with_capacity(m + 2);
    omega_knots.push((0.0, 0.0));
    for (j, &w) in omega_params.iter().enumerate() {
        omega_knots.push(((j + 1) as f64 * duration / (m + 1) as f64, w));
    }
    omega_knots.push((duration, 0.0));

    let delta_knots: Vec<(f64, f64)> = delta_params
        .iter()
        .enumerate()
        .map(|(j, &d)| (j as f64 * duration / (m - 1) as f64, d))
        .collect();

    PulseProgram::global(Waveform::new(omega_knots)?, Waveform::new(delta_knots)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_interpolates_linearly() {
        let w = Waveform::new(vec![(0.0, 0.0), (1.0, 10.0)]).unwrap();
        assert_eq!(w.evaluate(0.5).unwrap(), 5.0);
        assert_eq!(w.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(w.evaluate(1.0).unwrap(), 10.0);
        assert!(w.evaluate(1.0 + 1e-12).is_err());
        assert!(w.evaluate(-1e-12).is_err());
    }

    #[test]
    fn evaluate_hits_knots_exactly() {
        let w = Waveform::new(vec![(0.0, 1.0), (0.3, -2.0), (0.7, 4.0), (1.0, 0.5)]).unwrap();
        for &(t, v) in w.knots() {
            assert_eq!(w.evaluate(t).unwrap(), v);
        }
    }

    #[test]
    fn constant_waveform_everywhere() {
        let w = Waveform::constant(3.0, 2.0).unwrap();
        for t in [0.0, 0.37, 1.0, 1.999, 2.0] {
            assert_eq!(w.evaluate(t).unwrap(), 3.0);
        }
    }

    #[test]
    fn waveform_invariants_enforced() {
        assert!(Waveform::new(vec![(0.0, 1.0)]).is_err());
        assert!(Waveform::new(vec![(0.1, 1.0), (1.0, 1.0)]).is_err());
        assert!(Waveform::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(Waveform::new(vec![(0.0, 1.0), (1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn program_rejects_negative_omega_and_length_mismatch() {
        let omega = Waveform::new(vec![(0.0, 0.0), (1.0, -1.0)]).unwrap();
        let delta = Waveform::constant(0.0, 1.0).unwrap();
        assert!(PulseProgram::global(omega, delta.clone()).is_err());

        let omega = Waveform::constant(1.0, 1.0).unwrap();
        let delta_short = Waveform::constant(0.0, 0.5).unwrap();
        assert!(PulseProgram::global(omega, delta_short).is_err());
    }

    #[test]
    fn trapezoid_from_three_full_points() {
        let b = PulseBounds {
            omega_max: 4.0,
            delta_max: 1.0,
        };
        let p = parametrized_pulse(&[4.0, 4.0, 4.0], &[0.0, 0.0, 0.0], 1.0, &b).unwrap();
        assert_eq!(
            p.omega().knots(),
            &[(0.0, 0.0), (0.25, 4.0), (0.5, 4.0), (0.75, 4.0), (1.0, 0.0)]
        );
        assert_eq!(p.omega_at(0, 0.0).unwrap(), 0.0);
        assert_eq!(p.omega_at(0, 1.0).unwrap(), 0.0);
        assert_eq!(p.omega_at(0, 0.5).unwrap(), 4.0);
    }

    #[test]
    fn two_point_delta_is_a_ramp() {
        let b = PulseBounds {
            omega_max: 1.0,
            delta_max: 5.0,
        };
        let p = parametrized_pulse(&[1.0, 1.0], &[-5.0, 5.0], 2.0, &b).unwrap();
        assert_eq!(p.delta_at(0, 0.0).unwrap(), -5.0);
        assert_eq!(p.delta_at(0, 1.0).unwrap(), 0.0);
        assert_eq!(p.delta_at(0, 2.0).unwrap(), 5.0);
    }

    #[test]
    fn knot_values_round_trip_through_sampling() {
        let b = PulseBounds {
            omega_max: 2.0,
            delta_max: 3.0,
        };
        let (om, de) = ([0.5, 2.0, 1.0, 0.25], [-3.0, 0.5, 1.5, -0.5]);
        let p = parametrized_pulse(&om, &de, 4.0, &b).unwrap();
        let m = om.len();
        for (j, &w) in om.iter().enumerate() {
            let t = (j + 1) as f64 * 4.0 / (m + 1) as f64;
            assert_eq!(p.omega_at(0, t).unwrap(), w);
        }
        for (j, &d) in de.iter().enumerate() {
            let t = j as f64 * 4.0 / (m - 1) as f64;
            assert_eq!(p.delta_at(0, t).unwrap(), d);
        }
    }

    #[test]
    fn bound_violations_rejected() {
        let b = PulseBounds {
            omega_max: 1.0,
            delta_max: 1.0,
        };
        assert!(parametrized_pulse(&[0.5, 1.1], &[0.0, 0.0], 1.0, &b).is_err());
        assert!(parametrized_pulse(&[0.5, -0.1], &[0.0, 0.0], 1.0, &b).is_err());
        assert!(parametrized_pulse(&[0.5, 0.5], &[0.0, 1.5], 1.0, &b).is_err());
        assert!(parametrized_pulse(&[0.5], &[0.0], 1.0, &b).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let p = parametrized_pulse(
            &[0.1, 0.9, 0.4],
            &[-0.5, 0.0, 0.5],
            1.0,
            &PulseBounds {
                omega_max: 1.0,
                delta_max: 1.0,
            },
        )
        .unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let q: PulseProgram = serde_json::from_str(&json).unwrap();
        assert_eq!(p, q);
    }
}
