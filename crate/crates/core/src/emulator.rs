//! Full state-vector emulation of the driven Rydberg register.
//!
//! The Hamiltonian is taken literally as
//!
//! ```text
//! H(t) = Σ_i Ω_i(t) σ̂ˣ_i − Σ_i Δ_i(t) n̂_i + Σ_{i<j} U_ij n̂_i n̂_j,
//! U_ij = C₆ / |r_i − r_j|⁶
//! ```
//!
//! — note the σ̂ˣ coefficient is Ω, not Ω/2, so a full ground→excited
//! transfer takes Ω·t = π/2. Hardware conventions differ; every consumer of
//! this module inherits this choice.
//!
//! Basis ordering: amplitude index s encodes the assignment with bit i of s
//! equal to n_i (site 0 = least significant bit).
//!
//! Integration: per step the state is advanced by exp(−i·h·H(t_mid)) with H
//! frozen at the step midpoint, applied through a Lanczos (Krylov) expansion
//! with full reorthogonalization — norm-preserving to machine precision and
//! O(h³) accurate per step. The `max_dt` precondition keeps ‖h·H‖ small so
//! a handful of Krylov vectors reaches ~1e-13 per step.
//!
//! Decay (rate `gamma_eff`, jump operators √Γ·|0⟩⟨1| per qubit) is emulated
//! by Monte-Carlo wave-function trajectories: a symmetric Strang split
//! multiplies exp(−Γh/4·N̂) around each unitary step, and jumps fire by the
//! norm-threshold rule. Trajectories with an all-zero noise model reproduce
//! `evolve` bit for bit (every noise factor is then exactly 1.0 or 0.0 and
//! no random number is drawn).
//!
//! Determinism: every stochastic entry point derives one ChaCha12 stream per
//! shot from `NoiseModel::seed` (stream = shot index), so results are
//! independent of thread count; the static per-site Ω inhomogeneity uses a
//! reserved stream so it is frozen across shots of the same model.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ising::Bitstring;
use crate::linalg::jacobi_eigh;
use crate::pulse::{PulseProgram, Waveform};
use crate::register::Register;
use crate::{Error, Result};

/// Hard ceiling on emulated register size (2^20 amplitudes).
pub const MAX_EMULATED_QUBITS: usize = 20;

/// Stream index reserved for the static per-site Ω inhomogeneity draws;
/// shot streams use 0..shots and never collide with it.
const STATIC_NOISE_STREAM: u64 = u64::MAX;

/// Krylov subspace cap; the `max_dt` precondition makes convergence at
/// ~10 vectors typical, so the cap is pure safety.
const KRYLOV_MAX: usize = 30;
const KRYLOV_TOL: f64 = 1e-13;

/// Largest integration step that resolves every angular frequency in the
/// problem 50× per period: `2π / (50·max(Ω_max, Δ_max, U_max))`. Returns
/// infinity when all three vanish (no dynamics to resolve).
pub fn max_dt(omega_max: f64, delta_max: f64, u_max: f64) -> f64 {
    let peak = omega_max.abs().max(delta_max.abs()).max(u_max.abs());
    if peak == 0.0 {
        f64::INFINITY
    } else {
        2.0 * std::f64::consts::PI / (50.0 * peak)
    }
}

/// A pure state of an M-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    qubits: usize,
}

impl QuantumState {
    /// |0…0⟩ on `qubits` qubits.
    pub fn ground(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_EMULATED_QUBITS {
            return Err(Error::Emulator(format!(
                "state needs 1..={MAX_EMULATED_QUBITS} qubits, got {qubits}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, qubits })
    }

    /// From raw amplitudes (length a power of two); normalizes.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Emulator(format!(
                "amplitude count must be a power of two ≥ 2, got {dim}"
            )));
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_EMULATED_QUBITS {
            return Err(Error::Emulator(format!(
                "{qubits} qubits exceed the {MAX_EMULATED_QUBITS}-qubit ceiling"
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Emulator(format!("state norm {norm} unusable")));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { amplitudes, qubits })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    /// Amplitudes in basis order (bit i of the index = n_i).
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Σ|a|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |a_s|² of one basis state.
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// ⟨n_i⟩, exactly from the amplitudes.
    pub fn occupation(&self, i: usize) -> f64 {
        assert!(i < self.qubits, "qubit {i} of {}", self.qubits);
        let bit = 1usize << i;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(s, _)| s & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// |⟨b|ψ⟩|².
    pub fn projector_expectation(&self, b: &Bitstring) -> Result<f64> {
        if b.len() != self.qubits {
            return Err(Error::BitstringLength {
                expected: self.qubits,
                got: b.len(),
            });
        }
        Ok(self.probability(b.to_index()))
    }
}

/// Binomial error bar on an occupation estimated from `shots` measurements:
/// `σ = sqrt(mean(1 − mean)/shots)`.
pub fn occupation_error(mean: f64, shots: u64) -> f64 {
    assert!(shots > 0, "error bar needs at least one shot");
    (mean * (1.0 - mean) / shots as f64).sqrt()
}

/// Hardware imperfections. All-zero (the default) is the ideal machine.
///
/// `seed` drives every stochastic element — measurement sampling, shot-to-
/// shot noise draws, decay jumps — through per-shot ChaCha12 streams; the
/// static per-site Ω factors come from a reserved stream so they describe
/// one fixed array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// False-positive detection probability (0 read as 1).
    pub epsilon: f64,
    /// False-negative detection probability (1 read as 0).
    pub epsilon_prime: f64,
    /// Shot-to-shot relative std of the global Ω.
    pub omega_rel_sigma: f64,
    /// Static per-site relative std of Ω.
    pub omega_inhomogeneity: f64,
    /// Shot-to-shot relative std of the global array spacing.
    pub spacing_sigma: f64,
    /// Shot-to-shot global detuning offset std, rad/s.
    pub delta_shift_sigma: f64,
    /// Effective decay rate, rad/s.
    pub gamma_eff: f64,
    /// Master RNG seed.
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    /// The ideal machine: no noise anywhere, seed 0.
    pub fn noiseless() -> Self {
        Self {
            epsilon: 0.0,
            epsilon_prime: 0.0,
            omega_rel_sigma: 0.0,
            omega_inhomogeneity: 0.0,
            spacing_sigma: 0.0,
            delta_shift_sigma: 0.0,
            gamma_eff: 0.0,
            seed: 0,
        }
    }

    /// Published hardware-fit values: ε = 2%, ε′ = 18%, 5% shot-to-shot Ω,
    /// 4% static Ω inhomogeneity, 1% array-spacing spread, 2π×0.06 MHz
    /// detuning shifts, and an effective decay rate of 2π×0.05 MHz.
    pub fn hardware() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            epsilon: 0.02,
            epsilon_prime: 0.18,
            omega_rel_sigma: 0.05,
            omega_inhomogeneity: 0.04,
            spacing_sigma: 0.01,
            delta_shift_sigma: two_pi * 0.06e6,
            gamma_eff: two_pi * 0.05e6,
            seed: 0,
        }
    }

    /// Same model, different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Any noise source that alters the dynamics (as opposed to detection)?
    pub fn has_dynamic_noise(&self) -> bool {
        self.omega_rel_sigma > 0.0
            || self.omega_inhomogeneity > 0.0
            || self.spacing_sigma > 0.0
            || self.delta_shift_sigma > 0.0
            || self.gamma_eff > 0.0
    }

    /// Any detection error?
    pub fn has_detection_noise(&self) -> bool {
        self.epsilon > 0.0 || self.epsilon_prime > 0.0
    }

    fn validate(&self) -> Result<()> {
        for (name, p) in [("epsilon", self.epsilon), ("epsilon_prime", self.epsilon_prime)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::Emulator(format!(
                    "{name} must be a probability, got {p}"
                )));
            }
        }
        for (name, r) in [
            ("omega_rel_sigma", self.omega_rel_sigma),
            ("omega_inhomogeneity", self.omega_inhomogeneity),
            ("spacing_sigma", self.spacing_sigma),
            ("delta_shift_sigma", self.delta_shift_sigma),
            ("gamma_eff", self.gamma_eff),
        ] {
            if r < 0.0 || !r.is_finite() {
                return Err(Error::Emulator(format!("{name} must be ≥ 0, got {r}")));
            }
        }
        Ok(())
    }

    /// Static per-site Ω multipliers for an M-site array (exactly 1.0 when
    /// the inhomogeneity is zero — no draws happen).
    fn site_omega_factors(&self, m: usize) -> Vec<f64> {
        if self.omega_inhomogeneity == 0.0 {
            return vec![1.0; m];
        }
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(STATIC_NOISE_STREAM);
        (0..m)
            .map(|_| 1.0 + self.omega_inhomogeneity * standard_normal(&mut rng))
            .collect()
    }
}

/// One standard-normal draw (Box-Muller; consumes exactly two uniforms).
pub(crate) fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Measured bitstring frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleHistogram {
    counts: BTreeMap<Bitstring, u64>,
    shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseModel>,
}

impl SampleHistogram {
    fn new(noise: Option<NoiseModel>) -> Self {
        Self {
            counts: BTreeMap::new(),
            shots: 0,
            noise,
        }
    }

    /// Assemble a histogram from precomputed counts (`shots` = their sum).
    /// All bitstrings must share one length; an empty map is the legal
    /// zero-shot histogram exact-expectation runs record.
    pub fn from_counts(
        counts: BTreeMap<Bitstring, u64>,
        noise: Option<NoiseModel>,
    ) -> Result<Self> {
        let mut lengths = counts.keys().map(|b| b.len());
        if let Some(first) = lengths.next() {
            if lengths.any(|l| l != first) {
                return Err(Error::Emulator(
                    "histogram mixes bitstring lengths".into(),
                ));
            }
        }
        let shots = counts.values().sum();
        Ok(Self {
            counts,
            shots,
            noise,
        })
    }

    fn record(&mut self, b: Bitstring) {
        *self.counts.entry(b).or_insert(0) += 1;
        self.shots += 1;
    }

    /// Counts keyed by bitstring, iterated in display order.
    pub fn counts(&self) -> &BTreeMap<Bitstring, u64> {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// The noise model the samples were drawn under, if any was supplied.
    pub fn noise(&self) -> Option<&NoiseModel> {
        self.noise.as_ref()
    }

    /// Observed frequency of one bitstring.
    pub fn frequency(&self, b: &Bitstring) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        *self.counts.get(b).unwrap_or(&0) as f64 / self.shots as f64
    }

    /// Entries sorted by count descending, then bitstring ascending — the
    /// order histograms are reported in.
    pub fn sorted_entries(&self) -> Vec<(Bitstring, u64)> {
        let mut entries: Vec<(Bitstring, u64)> =
            self.counts.iter().map(|(b, c)| (*b, *c)).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        entries
    }
}

/// Everything fixed about one propagation: geometry, couplings, and the
/// noise realizations that stay constant within a shot.
struct Propagator<'a> {
    m: usize,
    dim: usize,
    pulse: &'a PulseProgram,
    /// C₆/r⁶ interaction of every basis state, rad/s.
    diag_u: Vec<f64>,
    /// Per-site Ω multiplier (static inhomogeneity × shot factor).
    omega_factor: Vec<f64>,
    /// Additive global detuning offset, rad/s.
    delta_shift: f64,
}

impl<'a> Propagator<'a> {
    fn new(
        register: &Register,
        pulse: &'a PulseProgram,
        omega_factor: Vec<f64>,
        delta_shift: f64,
        u_scale: f64,
    ) -> Result<Self> {
        let m = register.len();
        if m > MAX_EMULATED_QUBITS {
            return Err(Error::Emulator(format!(
                "{m} qubits exceed the {MAX_EMULATED_QUBITS}-qubit emulation ceiling"
            )));
        }
        if pulse.mode() == crate::pulse::PulseMode::Local && pulse.delta_channels() != m {
            return Err(Error::Emulator(format!(
                "pulse drives {} qubits, register has {m}",
                pulse.delta_channels()
            )));
        }
        let dim = 1usize << m;

        // Pairwise interactions, then the diagonal by bit recursion:
        // diag_u[s] = diag_u[s minus lowest bit] + Σ_{j ∈ rest} U[lowest][j].
        let mut u = vec![0.0f64; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let uij = u_scale * register.interaction_strength(i, j);
                u[i * m + j] = uij;
                u[j * m + i] = uij;
            }
        }
        let mut diag_u = vec![0.0f64; dim];
        for s in 1..dim {
            let i = s.trailing_zeros() as usize;
            let rest = s & (s - 1);
            let mut acc = diag_u[rest];
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                acc += u[i * m + j];
                r &= r - 1;
            }
            diag_u[s] = acc;
        }

        Ok(Self {
            m,
            dim,
            pulse,
            diag_u,
            omega_factor,
            delta_shift,
        })
    }

    /// H(t_mid)ψ with the midpoint controls baked into `diag`/`omegas`.
    fn apply_h(&self, omegas: &[f64], diag: &[f64], x: &[Complex64], y: &mut [Complex64]) {
        for s in 0..self.dim {
            y[s] = diag[s] * x[s];
        }
        for (i, &w) in omegas.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let bit = 1usize << i;
            for s in 0..self.dim {
                y[s] += w * x[s ^ bit];
            }
        }
    }

    /// Advance ψ ← exp(−i·h·H(t₀+h/2))ψ by the Lanczos expansion.
    fn unitary_step(&self, psi: &mut Vec<Complex64>, t0: f64, h: f64) -> Result<()> {
        let t_mid = t0 + 0.5 * h;
        let mut omegas = Vec::with_capacity(self.m);
        let mut diag = vec![0.0f64; self.dim];
        for i in 0..self.m {
            omegas.push(self.pulse.omega_at(i, t_mid)? * self.omega_factor[i]);
        }
        // Σ Δ_i n_i by the same bit recursion as the interactions.
        let mut deltas = Vec::with_capacity(self.m);
        for i in 0..self.m {
            deltas.push(self.pulse.delta_at(i, t_mid)? + self.delta_shift);
        }
        let mut delta_sum = vec![0.0f64; self.dim];
        for s in 1..self.dim {
            delta_sum[s] = delta_sum[s & (s - 1)] + deltas[s.trailing_zeros() as usize];
        }
        for s in 0..self.dim {
            diag[s] = self.diag_u[s] - delta_sum[s];
        }

        lanczos_exp(psi, h, |x, y| self.apply_h(&omegas, &diag, x, y));
        Ok(())
    }
}

/// ψ ← exp(−i·h·A)ψ for a Hermitian (real-symmetric) operator given as a
/// matvec. Lanczos with full reorthogonalization; adaptive depth against a
/// Saad-style a-posteriori estimate.
fn lanczos_exp(psi: &mut Vec<Complex64>, h: f64, apply: impl Fn(&[Complex64], &mut [Complex64])) {
    let dim = psi.len();
    let beta0 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if beta0 == 0.0 {
        return;
    }
    let k_cap = KRYLOV_MAX.min(dim);

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k_cap);
    basis.push(psi.iter().map(|a| a / beta0).collect());
    let mut alphas: Vec<f64> = Vec::with_capacity(k_cap);
    let mut betas: Vec<f64> = Vec::with_capacity(k_cap);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut y: Vec<Complex64> = Vec::new();

    for j in 0..k_cap {
        apply(&basis[j], &mut w);
        let alpha = basis[j]
            .iter()
            .zip(&w)
            .map(|(v, x)| (v.conj() * x).re)
            .sum::<f64>();
        alphas.push(alpha);

        for (idx, v) in basis.iter().enumerate() {
            // Subtract the tridiagonal projections, then reorthogonalize
            // against everything (classical Gram-Schmidt; the explicit
            // coefficients below double as the α/β subtraction).
            let coeff: Complex64 = if idx == j {
                Complex64::new(alpha, 0.0)
            } else if idx + 1 == j {
                Complex64::new(betas[idx], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            if coeff != Complex64::new(0.0, 0.0) {
                for s in 0..dim {
                    w[s] -= coeff * v[s];
                }
            }
        }
        // Full reorthogonalization sweep.
        for v in &basis {
            let overlap: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            if overlap.norm_sqr() > 0.0 {
                for s in 0..dim {
                    w[s] -= overlap * v[s];
                }
            }
        }

        let beta = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();

        // exp(−i·h·T) e₁ on the (j+1)-dim tridiagonal.
        let k = j + 1;
        let mut t = vec![0.0f64; k * k];
        for (i, &a) in alphas.iter().enumerate() {
            t[i * k + i] = a;
        }
        for (i, &b) in betas.iter().enumerate() {
            t[i * k + (i + 1)] = b;
            t[(i + 1) * k + i] = b;
        }
        let eig = jacobi_eigh(&t, k);
        y = vec![Complex64::new(0.0, 0.0); k];
        for (col, &lambda) in eig.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -h * lambda);
            let weight = eig.vectors[col]; // ⟨e₁|q_col⟩ (row 0)
            for (row, amp) in y.iter_mut().enumerate() {
                *amp += eig.vectors[row * k + col] * phase * weight;
            }
        }
        // Happy breakdown (invariant subspace) or converged estimate. The
        // residual of the Krylov exponential is ∝ β_{k+1}·∫₀ʰ[exp(−isT)]_{k,1},
        // bounded to first order by the dimensionless |h·β|·|y_k| — β alone
        // would compare rad/s against the absolute tolerance.
        let err = (h * beta).abs() * y[k - 1].norm();
        if beta < 1e-14 || err < KRYLOV_TOL || k == k_cap {
            break;
        }
        betas.push(beta);
        for a in w.iter_mut() {
            *a /= beta;
        }
        basis.push(std::mem::replace(&mut w, vec![Complex64::new(0.0, 0.0); dim]));
    }

    for a in psi.iter_mut() {
        *a = Complex64::new(0.0, 0.0);
    }
    for (m_idx, v) in basis.iter().enumerate() {
        if m_idx >= y.len() {
            break;
        }
        let c = beta0 * y[m_idx];
        for s in 0..dim {
            psi[s] += c * v[s];
        }
    }
}

/// The `U_max` the dt precondition is stated on. Deliberately the nominal
/// (noise-free) value so the precondition is checkable by the caller.
fn pairwise_u_max(register: &Register) -> f64 {
    register.max_interaction()
}

fn check_dt(dt: f64, pulse: &PulseProgram, u_max: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Emulator(format!("dt must be positive, got {dt}")));
    }
    let cap = max_dt(pulse.omega_max_abs(), pulse.delta_max_abs(), u_max);
    if dt > cap * (1.0 + 1e-12) {
        return Err(Error::Emulator(format!(
            "dt = {dt:.3e} s too coarse: the fastest scale needs dt ≤ {cap:.3e} s"
        )));
    }
    Ok(())
}

/// Integrate the Schrödinger equation from |0…0⟩ under `pulse`.
pub fn evolve(register: &Register, pulse: &PulseProgram, dt: f64) -> Result<QuantumState> {
    let initial = QuantumState::ground(register.len())?;
    evolve_from(&initial, register, pulse, dt)
}

/// Integrate from an arbitrary initial state.
pub fn evolve_from(
    initial: &QuantumState,
    register: &Register,
    pulse: &PulseProgram,
    dt: f64,
) -> Result<QuantumState> {
    if initial.qubit_count() != register.len() {
        return Err(Error::Emulator(format!(
            "initial state has {} qubits, register {}",
            initial.qubit_count(),
            register.len()
        )));
    }
    check_dt(dt, pulse, pairwise_u_max(register))?;
    let prop = Propagator::new(register, pulse, vec![1.0; register.len()], 0.0, 1.0)?;

    let mut psi = initial.amplitudes().to_vec();
    let duration = pulse.duration();
    let steps = (duration / dt).ceil().max(1.0) as usize;
    for step in 0..steps {
        // Exact products avoid accumulated drift past the pulse domain.
        let t0 = step as f64 * dt;
        if t0 >= duration {
            break;
        }
        let h = dt.min(duration - t0);
        prop.unitary_step(&mut psi, t0, h)?;
    }
    Ok(QuantumState {
        amplitudes: psi,
        qubits: register.len(),
    })
}

/// One stochastic noise trajectory from |0…0⟩.
///
/// Per shot: Ω is scaled by a global Normal(1, ω_rel) factor and the static
/// per-site factors; Δ gains a Normal(0, δ_shift) offset; the array spacing
/// scales by Normal(1, spacing σ) (so U by its inverse sixth power); decay
/// jumps follow the norm-threshold rule. With the all-zero model this is
/// `evolve` exactly — no draw is taken for a vanished noise source.
pub fn evolve_trajectory(
    register: &Register,
    pulse: &PulseProgram,
    dt: f64,
    noise: &NoiseModel,
    rng: &mut ChaCha12Rng,
) -> Result<QuantumState> {
    let initial = QuantumState::ground(register.len())?;
    evolve_trajectory_from(&initial, register, pulse, dt, noise, rng)
}

/// One stochastic noise trajectory from an arbitrary initial state.
pub fn evolve_trajectory_from(
    initial: &QuantumState,
    register: &Register,
    pulse: &PulseProgram,
    dt: f64,
    noise: &NoiseModel,
    rng: &mut ChaCha12Rng,
) -> Result<QuantumState> {
    noise.validate()?;
    let m = register.len();
    if initial.qubit_count() != m {
        return Err(Error::Emulator(format!(
            "initial state has {} qubits, register {m}",
            initial.qubit_count()
        )));
    }

    let mut omega_factor = noise.site_omega_factors(m);
    if noise.omega_rel_sigma > 0.0 {
        let shot = 1.0 + noise.omega_rel_sigma * standard_normal(rng);
        for f in omega_factor.iter_mut() {
            *f *= shot;
        }
    }
    let delta_shift = if noise.delta_shift_sigma > 0.0 {
        noise.delta_shift_sigma * standard_normal(rng)
    } else {
        0.0
    };
    let u_scale = if noise.spacing_sigma > 0.0 {
        (1.0 + noise.spacing_sigma * standard_normal(rng)).powi(-6)
    } else {
        1.0
    };

    check_dt(dt, pulse, pairwise_u_max(register))?;
    let prop = Propagator::new(register, pulse, omega_factor, delta_shift, u_scale)?;

    let mut psi = initial.amplitudes().to_vec();
    let duration = pulse.duration();
    let steps = (duration / dt).ceil().max(1.0) as usize;
    let dim = 1usize << m;
    let decay = noise.gamma_eff > 0.0;
    let mut threshold = if decay { rng.gen::<f64>() } else { 0.0 };

    for step in 0..steps {
        let t0 = step as f64 * dt;
        if t0 >= duration {
            break;
        }
        let h = dt.min(duration - t0);
        if decay {
            // Strang half-step of the anti-Hermitian part: each basis state
            // decays as exp(−Γ·h/4 · number of excitations).
            let mut factors = Vec::with_capacity(m + 1);
            for count in 0..=m {
                factors.push((-noise.gamma_eff * 0.25 * h * count as f64).exp());
            }
            for (s, a) in psi.iter_mut().enumerate() {
                *a *= factors[s.count_ones() as usize];
            }
            prop.unitary_step(&mut psi, t0, h)?;
            for (s, a) in psi.iter_mut().enumerate() {
                *a *= factors[s.count_ones() as usize];
            }

            let norm_sqr: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
            if norm_sqr < threshold {
                // A jump fired: pick the qubit ∝ Γ⟨n_i⟩ and apply |0⟩⟨1|.
                let mut occ = vec![0.0f64; m];
                for (s, a) in psi.iter().enumerate() {
                    let p = a.norm_sqr();
                    let mut bits = s;
                    while bits != 0 {
                        occ[bits.trailing_zeros() as usize] += p;
                        bits &= bits - 1;
                    }
                }
                let total: f64 = occ.iter().sum();
                let target = rng.gen::<f64>() * total;
                let mut acc = 0.0;
                let mut qubit = m - 1;
                for (i, &o) in occ.iter().enumerate() {
                    acc += o;
                    if target < acc {
                        qubit = i;
                        break;
                    }
                }
                let bit = 1usize << qubit;
                let mut lowered = vec![Complex64::new(0.0, 0.0); dim];
                for s in 0..dim {
                    if s & bit != 0 {
                        lowered[s ^ bit] = psi[s];
                    }
                }
                let norm = lowered.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for a in lowered.iter_mut() {
                        *a /= norm;
                    }
                }
                psi = lowered;
                threshold = rng.gen::<f64>();
            }
        } else {
            prop.unitary_step(&mut psi, t0, h)?;
        }
    }

    if decay {
        // Trajectory states are conditioned on "no further jump": renormalize.
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for a in psi.iter_mut() {
                *a /= norm;
            }
        }
    }
    Ok(QuantumState {
        amplitudes: psi,
        qubits: m,
    })
}

/// Measure one bitstring from ψ's probabilities, then apply detection
/// errors: each 0 reads as 1 with probability ε, each 1 as 0 with ε′.
fn measure(
    state: &QuantumState,
    noise: &NoiseModel,
    rng: &mut ChaCha12Rng,
) -> Result<Bitstring> {
    let dim = state.amplitudes().len();
    let total: f64 = state.norm_sqr();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut drawn = dim - 1;
    for s in 0..dim {
        acc += state.probability(s);
        if target < acc {
            drawn = s;
            break;
        }
    }
    let mut mask = drawn as u32;
    if noise.has_detection_noise() {
        for i in 0..state.qubit_count() {
            let bit = 1u32 << i;
            if mask & bit != 0 {
                if noise.epsilon_prime > 0.0 && rng.gen::<f64>() < noise.epsilon_prime {
                    mask ^= bit;
                }
            } else if noise.epsilon > 0.0 && rng.gen::<f64>() < noise.epsilon {
                mask ^= bit;
            }
        }
    }
    Bitstring::new(mask, state.qubit_count())
}

/// Sample a fixed state `shots` times under the detection-error model.
/// Deterministic in `noise.seed`; dynamic noise fields are ignored here
/// (they act during evolution, not measurement).
pub fn sample(state: &QuantumState, shots: u64, noise: &NoiseModel) -> Result<SampleHistogram> {
    noise.validate()?;
    if shots == 0 {
        return Err(Error::Emulator("sampling needs shots ≥ 1".into()));
    }
    let mut histogram = SampleHistogram::new(Some(*noise));
    for shot in 0..shots {
        let mut rng = ChaCha12Rng::seed_from_u64(noise.seed);
        rng.set_stream(shot);
        histogram.record(measure(state, noise, &mut rng)?);
    }
    Ok(histogram)
}

/// Evolve one stochastic trajectory per shot and measure it. The per-shot
/// ChaCha12 stream covers the trajectory's noise draws and the measurement,
/// so the histogram is identical at any thread count.
pub fn sample_trajectories(
    register: &Register,
    pulse: &PulseProgram,
    dt: f64,
    shots: u64,
    noise: &NoiseModel,
) -> Result<SampleHistogram> {
    noise.validate()?;
    if shots == 0 {
        return Err(Error::Emulator("sampling needs shots ≥ 1".into()));
    }
    let outcomes: Result<Vec<Bitstring>> = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = ChaCha12Rng::seed_from_u64(noise.seed);
            rng.set_stream(shot);
            let state = evolve_trajectory(register, pulse, dt, noise, &mut rng)?;
            measure(&state, noise, &mut rng)
        })
        .collect();
    let mut histogram = SampleHistogram::new(Some(*noise));
    for b in outcomes? {
        histogram.record(b);
    }
    Ok(histogram)
}

/// A (Δ, T) grid of measured probabilities for one target bitstring under
/// constant global drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeScan {
    /// Row coordinates: constant detunings, rad/s.
    pub deltas: Vec<f64>,
    /// Column coordinates: pulse durations, s.
    pub durations: Vec<f64>,
    /// values[row][col] = P(target | Δ = deltas[row], T = durations[col]).
    pub values: Vec<Vec<f64>>,
}

/// Scan a constant global pulse over a detuning × duration grid and record
/// the probability of `target` in each cell — sampled at `shots` shots, or
/// the exact projector expectation when `shots` = 0.
#[allow(clippy::too_many_arguments)]
pub fn landscape_scan(
    register: &Register,
    target: &Bitstring,
    omega_const: f64,
    delta_range: (f64, f64),
    duration_range: (f64, f64),
    grid: (usize, usize),
    shots: u64,
    noise: &NoiseModel,
) -> Result<LandscapeScan> {
    noise.validate()?;
    let m = register.len();
    if target.len() != m {
        return Err(Error::BitstringLength {
            expected: m,
            got: target.len(),
        });
    }
    if grid.0 < 2 || grid.1 < 2 {
        return Err(Error::Emulator(format!(
            "landscape grid must be at least 2×2, got {}×{}",
            grid.0, grid.1
        )));
    }
    if !(omega_const >= 0.0) {
        return Err(Error::Emulator(format!(
            "constant Ω must be ≥ 0, got {omega_const}"
        )));
    }
    if duration_range.0 < 0.0 || duration_range.1 < duration_range.0 {
        return Err(Error::Emulator(format!(
            "bad duration range {duration_range:?}"
        )));
    }

    let linspace = |a: f64, b: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect()
    };
    let deltas = linspace(delta_range.0, delta_range.1, grid.0);
    let durations = linspace(duration_range.0, duration_range.1, grid.1);

    let u_max = pairwise_u_max(register);

    let cells: Result<Vec<f64>> = (0..grid.0 * grid.1)
        .into_par_iter()
        .map(|cell| {
            let delta = deltas[cell / grid.1];
            let duration = durations[cell % grid.1];
            let cell_noise = noise.with_seed(
                noise
                    .seed
                    .wrapping_add((cell as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            let state = if duration == 0.0 {
                Some(QuantumState::ground(m)?)
            } else if cell_noise.has_dynamic_noise() && shots > 0 {
                None // per-shot trajectories below
            } else {
                let pulse = PulseProgram::global(
                    Waveform::constant(omega_const, duration)?,
                    Waveform::constant(delta, duration)?,
                )?;
                let dt = max_dt(omega_const, delta.abs(), u_max).min(duration);
                Some(evolve(register, &pulse, dt)?)
            };
            if shots == 0 {
                let state = state.expect("exact mode never defers to trajectories");
                state.projector_expectation(target)
            } else {
                let histogram = match state {
                    Some(state) => sample(&state, shots, &cell_noise)?,
                    None => {
                        let pulse = PulseProgram::global(
                            Waveform::constant(omega_const, duration)?,
                            Waveform::constant(delta, duration)?,
                        )?;
                        let dt = max_dt(omega_const, delta.abs(), u_max).min(duration);
                        sample_trajectories(register, &pulse, dt, shots, &cell_noise)?
                    }
                };
                Ok(histogram.frequency(target))
            }
        })
        .collect();
    let cells = cells?;
    let values = (0..grid.0)
        .map(|row| cells[row * grid.1..(row + 1) * grid.1].to_vec())
        .collect();
    Ok(LandscapeScan {
        deltas,
        durations,
        values,
    })
}
