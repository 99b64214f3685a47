//! Variational placement: Bayesian optimization of global pulse control
//! points against the sampled Ising cost.
//!
//! Each cycle evolves the register under a piecewise-linear pulse built from
//! `2m` control values (m Rabi points in `[0, Ω_max]`, m detuning points in
//! `[−Δ_max, Δ_max]`), samples it, and scores the histogram-weighted mean
//! cost `J = Σ_b (count_b/shots)·cost(b)`. A Gaussian-process surrogate
//! (Matérn-5/2, expected improvement) proposes the next candidate after a
//! uniform-random warmup; the `dummy` minimizer skips the surrogate and
//! stays uniform-random throughout.
//!
//! The optimizer works on the normalized unit cube `[0,1]^2m`; traces and
//! reports carry the corresponding physical values. Everything is
//! deterministic given the config and noise seeds: the proposal RNG derives
//! from `config.seed`, and cycle `k` samples under noise seed
//! `noise.seed + k·φ` (wrapping golden-ratio stride).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::emulator::{self, standard_normal, NoiseModel, QuantumState, SampleHistogram};
use crate::ising::{extract_placement, min_cost_bitstring, Bitstring, Placement, PlacementProblem};
use crate::linalg::{cho_solve, cholesky, solve_lower};
use crate::numerics::{normal_cdf, normal_pdf};
use crate::pulse::{parametrized_pulse, PulseBounds};
use crate::register::Register;
use crate::{Error, Result};

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
const EI_RANDOM_CANDIDATES: usize = 1024;
const EI_LOCAL_CANDIDATES: usize = 32;
const EI_LOCAL_SIGMA: f64 = 0.05;

/// Which proposal strategy drives the optimization cycles after warmup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Minimizer {
    /// Pure random search — the surrogate is never consulted.
    Dummy,
    /// Gaussian-process surrogate with expected-improvement acquisition.
    Gp,
}

/// Knobs for one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Control points per channel (m); the parameter space is 2m-dimensional.
    pub control_points: usize,
    /// Total evaluation cycles n_c.
    pub cycles: usize,
    /// Uniform-random warmup cycles n_r (1 ≤ n_r < n_c).
    pub warmup_cycles: usize,
    /// Measurement shots per cycle; 0 switches to exact expectations.
    pub shots_per_cycle: u64,
    pub minimizer: Minimizer,
    /// Physical boxes the normalized parameters map onto.
    pub bounds: PulseBounds,
    /// Pulse duration, seconds.
    pub duration: f64,
    /// Proposal-RNG seed.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            control_points: 5,
            cycles: 30,
            warmup_cycles: 8,
            shots_per_cycle: 200,
            minimizer: Minimizer::Gp,
            bounds: PulseBounds::default(),
            duration: crate::pulse::DEFAULT_DURATION,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=25).contains(&self.control_points) {
            return Err(Error::Optimizer(format!(
                "control points must be in 2..=25, got {}",
                self.control_points
            )));
        }
        if self.warmup_cycles < 1 || self.warmup_cycles >= self.cycles {
            return Err(Error::Optimizer(format!(
                "need 1 ≤ warmup < cycles, got warmup {} of {} cycles",
                self.warmup_cycles, self.cycles
            )));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::Optimizer(format!(
                "pulse duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.bounds.omega_max > 0.0) || !(self.bounds.delta_max > 0.0) {
            return Err(Error::Optimizer(format!(
                "parameter bounds must be positive, got Ω ≤ {}, |Δ| ≤ {}",
                self.bounds.omega_max, self.bounds.delta_max
            )));
        }
        Ok(())
    }
}

/// One recorded optimization cycle. With `shots ≥ 1` the `cost_estimate` is
/// exactly the histogram-weighted mean cost, recomputable via
/// [`estimate_cost`]; in exact-expectation runs (shots = 0) the histogram is
/// the empty zero-shot one and the estimate is the dense expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// Physical parameter vector: m Rabi points then m detuning points.
    pub params: Vec<f64>,
    pub histogram: SampleHistogram,
    pub cost_estimate: f64,
}

/// Histogram-weighted mean cost `Σ_b (count_b/shots)·cost(b)`.
pub fn estimate_cost(problem: &PlacementProblem, histogram: &SampleHistogram) -> Result<f64> {
    if histogram.shots() == 0 {
        return Err(Error::Optimizer(
            "cost estimation needs a histogram with at least one shot".into(),
        ));
    }
    let shots = histogram.shots() as f64;
    let mut acc = 0.0;
    for (bits, &count) in histogram.counts() {
        acc += count as f64 / shots * problem.cost(bits)?;
    }
    Ok(acc)
}

/// Dense expectation `⟨ψ|Î²|ψ⟩ = Σ_s |ψ_s|²·cost(s)` — the shots → ∞ limit
/// of [`estimate_cost`].
pub fn exact_cost_expectation(problem: &PlacementProblem, state: &QuantumState) -> Result<f64> {
    let m = problem.len();
    if state.qubit_count() != m {
        return Err(Error::BitstringLength {
            expected: m,
            got: state.qubit_count(),
        });
    }
    let mut acc = 0.0;
    for s in 0..(1usize << m) {
        let p = state.probability(s);
        if p > 0.0 {
            acc += p * problem.cost(&Bitstring::new(s as u32, m)?)?;
        }
    }
    Ok(acc)
}

/// Gaussian-process regressor on the unit cube: Matérn-5/2 kernel, median-
/// heuristic lengthscale clamped to `[0.1, 1]`, standardized targets, and a
/// small observation-noise jitter. Zero-noise interpolation holds to ~1e-8
/// at the training points.
pub struct GpSurrogate {
    x: Vec<Vec<f64>>,
    chol: Vec<f64>,
    alpha: Vec<f64>,
    y_mean: f64,
    y_std: f64,
    lengthscale: f64,
}

fn matern52(r: f64, lengthscale: f64) -> f64 {
    let a = 5f64.sqrt() * r / lengthscale;
    (1.0 + a + a * a / 3.0) * (-a).exp()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl GpSurrogate {
    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n == 0 || y.len() != n {
            return Err(Error::Optimizer(format!(
                "surrogate needs matched non-empty data, got {n} inputs and {} targets",
                y.len()
            )));
        }
        let dim = x[0].len();
        if x.iter().any(|p| p.len() != dim) {
            return Err(Error::Optimizer("ragged surrogate inputs".into()));
        }

        let y_mean = y.iter().sum::<f64>() / n as f64;
        let y_std = (y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n as f64)
            .sqrt()
            .max(1e-12);
        let targets: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();

        // Median pairwise distance sets the lengthscale.
        let mut dists: Vec<f64> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| distance(&x[i], &x[j]))
            .filter(|d| *d > 0.0)
            .collect();
        let lengthscale = if dists.is_empty() {
            0.5
        } else {
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            dists[dists.len() / 2].clamp(0.1, 1.0)
        };

        let mut k = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let v = matern52(distance(&x[i], &x[j]), lengthscale);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
            k[i * n + i] += 1e-8 + 1e-10;
        }
        let chol = cholesky(&k, n).ok_or_else(|| {
            Error::Optimizer("surrogate covariance is not positive definite".into())
        })?;
        let alpha = cho_solve(&chol, n, &targets);
        Ok(Self {
            x: x.to_vec(),
            chol,
            alpha,
            y_mean,
            y_std,
            lengthscale,
        })
    }

    /// Posterior mean and variance at one point, in target units.
    pub fn predict(&self, p: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let k_star: Vec<f64> = self
            .x
            .iter()
            .map(|xi| matern52(distance(xi, p), self.lengthscale))
            .collect();
        let mean_std: f64 = k_star.iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        let v = solve_lower(&self.chol, n, &k_star);
        let var_std = (1.0 - v.iter().map(|x| x * x).sum::<f64>()).max(1e-12);
        (
            mean_std * self.y_std + self.y_mean,
            var_std * self.y_std * self.y_std,
        )
    }
}

/// One successful optimization run over the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesResult {
    /// Normalized coordinates of the best evaluation.
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub trace: Vec<Evaluation>,
}

/// One objective evaluation (normalized coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub params: Vec<f64>,
    pub value: f64,
}

/// An aborted run: the objective failed, everything evaluated so far is
/// preserved.
#[derive(Debug)]
pub struct BayesAbort {
    pub trace: Vec<Evaluation>,
    pub source: Error,
}

impl From<BayesAbort> for Error {
    fn from(abort: BayesAbort) -> Self {
        Error::ObjectiveAborted {
            completed: abort.trace.len(),
            source: Box::new(abort.source),
        }
    }
}

fn uniform_point(dim: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}

/// Expected improvement of a minimization candidate.
fn expected_improvement(mean: f64, variance: f64, best: f64) -> f64 {
    let sigma = variance.sqrt();
    if sigma <= 0.0 {
        return (best - mean).max(0.0);
    }
    let z = (best - mean) / sigma;
    (best - mean) * normal_cdf(z) + sigma * normal_pdf(z)
}

fn propose(
    dim: usize,
    minimizer: Minimizer,
    trace: &[Evaluation],
    best: &Evaluation,
    rng: &mut ChaCha12Rng,
) -> Vec<f64> {
    if minimizer == Minimizer::Dummy {
        return uniform_point(dim, rng);
    }
    let x: Vec<Vec<f64>> = trace.iter().map(|e| e.params.clone()).collect();
    let y: Vec<f64> = trace.iter().map(|e| e.value).collect();
    let surrogate = match GpSurrogate::fit(&x, &y) {
        Ok(s) => s,
        // Degenerate data (e.g. duplicated points): stay with random search.
        Err(_) => return uniform_point(dim, rng),
    };

    let mut candidates = Vec::with_capacity(EI_RANDOM_CANDIDATES + EI_LOCAL_CANDIDATES);
    for _ in 0..EI_RANDOM_CANDIDATES {
        candidates.push(uniform_point(dim, rng));
    }
    for _ in 0..EI_LOCAL_CANDIDATES {
        candidates.push(
            best.params
                .iter()
                .map(|&v| (v + EI_LOCAL_SIGMA * standard_normal(rng)).clamp(0.0, 1.0))
                .collect(),
        );
    }

    let mut chosen = 0usize;
    let mut chosen_ei = f64::NEG_INFINITY;
    for (idx, candidate) in candidates.iter().enumerate() {
        let (mean, variance) = surrogate.predict(candidate);
        let ei = expected_improvement(mean, variance, best.value);
        if ei > chosen_ei {
            chosen_ei = ei;
            chosen = idx;
        }
    }
    candidates.swap_remove(chosen)
}

/// Minimize a black-box objective over `[0,1]^dim`: `warmup_cycles` uniform
/// random evaluations, then surrogate-guided proposals up to `cycles` total.
/// Deterministic given `config.seed`; an objective error aborts with the
/// trace so far preserved.
pub fn bayesian_minimize(
    dim: usize,
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
    config: &OptimizerConfig,
) -> std::result::Result<BayesResult, BayesAbort> {
    if let Err(e) = config.validate() {
        return Err(BayesAbort {
            trace: Vec::new(),
            source: e,
        });
    }
    if dim == 0 {
        return Err(BayesAbort {
            trace: Vec::new(),
            source: Error::Optimizer("objective dimension must be ≥ 1".into()),
        });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut trace: Vec<Evaluation> = Vec::with_capacity(config.cycles);
    let mut best: Option<Evaluation> = None;

    for cycle in 0..config.cycles {
        let params = if cycle < config.warmup_cycles {
            uniform_point(dim, &mut rng)
        } else {
            propose(
                dim,
                config.minimizer,
                &trace,
                best.as_ref().expect("warmup populated the trace"),
                &mut rng,
            )
        };
        let value = match objective(&params) {
            Ok(v) => v,
            Err(source) => return Err(BayesAbort { trace, source }),
        };
        let evaluation = Evaluation { params, value };
        // Strict improvement keeps the earliest optimum on ties.
        if best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(evaluation.clone());
        }
        trace.push(evaluation);
    }

    let best = best.expect("cycles ≥ 2 always evaluates");
    Ok(BayesResult {
        best_params: best.params,
        best_value: best.value,
        trace,
    })
}

/// Everything a variational run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqaOutcome {
    /// Cheapest bitstring of the final histogram, as a placement.
    pub placement: Placement,
    /// Most-sampled bitstring of the final histogram (ties: cheaper display
    /// order first) — reported alongside because the two selection rules
    /// disagree on hard instances.
    pub modal: Bitstring,
    /// Final re-evaluation histogram at the best parameters (empty in
    /// exact-expectation runs).
    pub histogram: SampleHistogram,
    /// Best physical parameters: m Rabi points then m detuning points.
    pub best_params: Vec<f64>,
    /// Best recorded cost estimate J.
    pub best_cost: f64,
    pub trace: Vec<CycleRecord>,
}

fn to_physical(normalized: &[f64], m: usize, bounds: &PulseBounds) -> (Vec<f64>, Vec<f64>) {
    let omegas = normalized[..m]
        .iter()
        .map(|&x| x * bounds.omega_max)
        .collect();
    let deltas = normalized[m..]
        .iter()
        .map(|&x| (2.0 * x - 1.0) * bounds.delta_max)
        .collect();
    (omegas, deltas)
}

/// Run the variational algorithm end to end and report both selection rules.
///
/// The objective evolves the register under the candidate pulse and scores
/// it by [`estimate_cost`] on `shots_per_cycle` samples (dense expectation
/// when 0). After the final cycle the best parameters are re-evolved and
/// re-sampled for the reported histogram and placements.
pub fn run_vqa(
    problem: &PlacementProblem,
    register: &Register,
    config: &OptimizerConfig,
    noise: &NoiseModel,
) -> Result<VqaOutcome> {
    config.validate()?;
    if problem.len() != register.len() {
        return Err(Error::Problem(format!(
            "problem has {} sites, register {}",
            problem.len(),
            register.len()
        )));
    }
    let m = config.control_points;
    let dim = 2 * m;
    // Worst-case bound over the whole parameter box keeps dt fixed across
    // cycles, so every candidate is integrated at the same resolution.
    let dt = emulator::max_dt(
        config.bounds.omega_max,
        config.bounds.delta_max,
        register.max_interaction(),
    );

    let evaluate = |normalized: &[f64], cycle: usize| -> Result<(SampleHistogram, f64)> {
        let (omegas, deltas) = to_physical(normalized, m, &config.bounds);
        let pulse = parametrized_pulse(&omegas, &deltas, config.duration, &config.bounds)?;
        let cycle_noise = noise.with_seed(
            noise
                .seed
                .wrapping_add((cycle as u64).wrapping_mul(SEED_STRIDE)),
        );
        if config.shots_per_cycle == 0 {
            let state = emulator::evolve(register, &pulse, dt)?;
            let cost = exact_cost_expectation(problem, &state)?;
            Ok((SampleHistogram::from_counts(BTreeMap::new(), None)?, cost))
        } else {
            let histogram = if cycle_noise.has_dynamic_noise() {
                emulator::sample_trajectories(
                    register,
                    &pulse,
                    dt,
                    config.shots_per_cycle,
                    &cycle_noise,
                )?
            } else {
                let state = emulator::evolve(register, &pulse, dt)?;
                emulator::sample(&state, config.shots_per_cycle, &cycle_noise)?
            };
            let cost = estimate_cost(problem, &histogram)?;
            Ok((histogram, cost))
        }
    };

    let mut records: Vec<CycleRecord> = Vec::with_capacity(config.cycles);
    let result = bayesian_minimize(
        dim,
        |normalized| {
            let cycle = records.len();
            let (histogram, cost) = evaluate(normalized, cycle)?;
            let (omegas, deltas) = to_physical(normalized, m, &config.bounds);
            let mut params = omegas;
            params.extend(deltas);
            records.push(CycleRecord {
                params,
                histogram,
                cost_estimate: cost,
            });
            Ok(cost)
        },
        config,
    )
    .map_err(Error::from)?;

    // Re-evaluate the winner for the reported artifacts.
    let (omegas, deltas) = to_physical(&result.best_params, m, &config.bounds);
    let pulse = parametrized_pulse(&omegas, &deltas, config.duration, &config.bounds)?;
    let final_noise = noise.with_seed(
        noise
            .seed
            .wrapping_add((config.cycles as u64).wrapping_mul(SEED_STRIDE)),
    );

    let (histogram, winner, modal) = if config.shots_per_cycle == 0 {
        let state = emulator::evolve(register, &pulse, dt)?;
        let live: Vec<Bitstring> = (0..(1usize << problem.len()))
            .filter(|&s| state.probability(s) > 1e-12)
            .map(|s| Bitstring::new(s as u32, problem.len()))
            .collect::<Result<_>>()?;
        let (winner, _) = min_cost_bitstring(problem, live.iter())?
            .expect("a normalized state populates at least one basis state");
        // Strictly-greater scan keeps the lowest index on probability ties.
        let mut modal = live[0];
        for &b in &live[1..] {
            if state.probability(b.to_index()) > state.probability(modal.to_index()) {
                modal = b;
            }
        }
        (
            SampleHistogram::from_counts(BTreeMap::new(), None)?,
            winner,
            modal,
        )
    } else {
        let histogram = if final_noise.has_dynamic_noise() {
            emulator::sample_trajectories(
                register,
                &pulse,
                dt,
                config.shots_per_cycle,
                &final_noise,
            )?
        } else {
            let state = emulator::evolve(register, &pulse, dt)?;
            emulator::sample(&state, config.shots_per_cycle, &final_noise)?
        };
        let (winner, _) = min_cost_bitstring(problem, histogram.counts().keys())?
            .expect("sampling produced at least one bitstring");
        let modal = histogram.sorted_entries()[0].0;
        (histogram, winner, modal)
    };

    let mut best_params = omegas;
    best_params.extend(deltas);
    Ok(VqaOutcome {
        placement: extract_placement(problem, &winner, None)?,
        modal,
        histogram,
        best_params,
        best_cost: result.best_value,
        trace: records,
    })
}
