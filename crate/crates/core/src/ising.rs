//! Compile a density and a set of candidate sites into a constrained Ising
//! placement problem, evaluate bitstring costs, and solve exactly.
//!
//! The model: approximate a non-negative density g by a sum of isotropic
//! Gaussians of shared variance σ² anchored at the candidate sites, each
//! switched by a binary n_i. Minimizing the L² error ‖g − Σ A_i n_i G_i‖²
//! over the switches expands into an Ising form
//!
//! ```text
//! cost(n) = −Σ_i Γ_i n_i + Σ_{i≠j} V_ij n_i n_j            (+ K, constant)
//! Γ_i  = 2 A_i ∫ g·G_i − A_i² ∫ G²
//! V_ij = A_i A_j (4πσ²)^{−d/2} exp(−|r_i − r_j|²/(4σ²))
//! ```
//!
//! The pair sum runs over ordered pairs (each unordered pair counts twice);
//! the constant K = ∫g² is reported but never added to costs. Cross terms
//! ∫g·G_i use trapezoidal quadrature on g's grid; Gaussian-Gaussian overlaps
//! use the closed-form whole-plane convolution.

use serde::{Deserialize, Serialize};

use crate::field::{GaussianComponent, ScalarField, SliceFrame};
use crate::numerics::normal_cdf;
use crate::register::MAX_SITES;
use crate::{Error, Result};

/// Overlap of two normalized isotropic Gaussians of equal variance at
/// separation `r` in `dims` dimensions: `(4πσ²)^{−d/2}·exp(−r²/(4σ²))`.
pub fn interaction(variance: f64, dims: usize, r: f64) -> f64 {
    let norm = (4.0 * std::f64::consts::PI * variance).powf(-(dims as f64) / 2.0);
    norm * (-r * r / (4.0 * variance)).exp()
}

/// How the quadratic term sums site pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairConvention {
    /// Ordered pairs i≠j: every unordered pair contributes 2·V_ij. The
    /// default, matching the L² expansion literally.
    OrderedPairs,
    /// Unordered pairs i<j: half the quadratic weight, for sensitivity
    /// checks against the other reading.
    UnorderedPairs,
}

/// A binary site assignment, site 0 first. `Display`/`FromStr` use the
/// "101001" convention: character k is n_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Bitstring {
    mask: u32,
    len: usize,
}

impl Bitstring {
    /// From a packed mask where bit k (LSB = site 0) is n_k.
    pub fn new(mask: u32, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_SITES {
            return Err(Error::Problem(format!(
                "bitstring length must be 1..={MAX_SITES}, got {len}"
            )));
        }
        if len < 32 && mask >> len != 0 {
            return Err(Error::Problem(format!(
                "mask {mask:#b} has bits beyond length {len}"
            )));
        }
        Ok(Self { mask, len })
    }

    /// The all-zero assignment.
    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(0, len)
    }

    /// From the list of excited site indices.
    pub fn from_indices(indices: &[usize], len: usize) -> Result<Self> {
        let mut mask = 0u32;
        for &i in indices {
            if i >= len {
                return Err(Error::Problem(format!(
                    "index {i} out of range for length {len}"
                )));
            }
            mask |= 1 << i;
        }
        Self::new(mask, len)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // length ≥ 1 by construction
    }

    /// n_i as a bool.
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.mask & (1 << i) != 0
    }

    /// Number of excitations.
    pub fn count_ones(&self) -> u32 {
        self.mask.count_ones()
    }

    /// Packed mask; doubles as the computational-basis index (site 0 = LSB).
    pub fn mask(&self) -> u32 {
        self.mask
    }

    /// Computational-basis index of this assignment.
    pub fn to_index(&self) -> usize {
        self.mask as usize
    }

    /// Ascending excited site indices.
    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count_ones() as usize);
        let mut m = self.mask;
        while m != 0 {
            out.push(m.trailing_zeros() as usize);
            m &= m - 1;
        }
        out
    }

    /// Lexicographic comparison of the ascending excited-index lists; the
    /// smaller prefers lower-indexed sites. This is the documented tie-break
    /// for the exact solvers (distinct from `Ord`, which sorts display
    /// strings).
    pub fn cmp_indices(&self, other: &Self) -> std::cmp::Ordering {
        let (mut a, mut b) = (self.mask, other.mask);
        while a != 0 && b != 0 {
            let (ia, ib) = (a.trailing_zeros(), b.trailing_zeros());
            if ia != ib {
                return ia.cmp(&ib);
            }
            a &= a - 1;
            b &= b - 1;
        }
        // A strict prefix (fewer excitations) sorts first.
        (a != 0).cmp(&(b != 0))
    }
}

impl std::fmt::Display for Bitstring {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Bitstring {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut mask = 0u32;
        let mut len = 0usize;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => {
                    if i >= MAX_SITES {
                        return Err(Error::Problem(format!(
                            "bitstring longer than {MAX_SITES}: {s:?}"
                        )));
                    }
                    mask |= 1 << i;
                }
                other => {
                    return Err(Error::Problem(format!(
                        "bitstring may contain only 0/1, found {other:?} in {s:?}"
                    )))
                }
            }
            len = i + 1;
        }
        Self::new(mask, len)
    }
}

impl TryFrom<String> for Bitstring {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Bitstring> for String {
    fn from(b: Bitstring) -> String {
        b.to_string()
    }
}

impl PartialOrd for Bitstring {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bitstring {
    /// Lexicographic on the display string ("0…" < "1…"), then by length.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let common = self.len.min(other.len);
        for i in 0..common {
            match self.get(i).cmp(&other.get(i)) {
                std::cmp::Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.len.cmp(&other.len)
    }
}

/// The compiled Ising placement problem over a fixed set of sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblem", into = "RawProblem")]
pub struct PlacementProblem {
    sites: Vec<[f64; 2]>,
    variance: f64,
    amplitudes: Vec<f64>,
    gamma: Vec<f64>,
    /// Row-major M×M; diagonal stores the self-overlap A_i²∫G².
    v: Vec<f64>,
    k_const: f64,
    exclusion_radius: f64,
    dims: usize,
    truncation_warning: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawProblem {
    sites: Vec<[f64; 2]>,
    variance: f64,
    amplitudes: Vec<f64>,
    gamma: Vec<f64>,
    v: Vec<Vec<f64>>,
    k_const: f64,
    exclusion_radius: f64,
    dims: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncation_warning: Option<String>,
}

impl TryFrom<RawProblem> for PlacementProblem {
    type Error = Error;
    fn try_from(raw: RawProblem) -> Result<Self> {
        let m = raw.sites.len();
        if raw.v.len() != m || raw.v.iter().any(|row| row.len() != m) {
            return Err(Error::Problem(format!("V must be {m}×{m}")));
        }
        let flat: Vec<f64> = raw.v.into_iter().flatten().collect();
        let mut p = PlacementProblem::from_parts(
            raw.sites,
            raw.variance,
            raw.amplitudes,
            raw.gamma,
            flat,
            raw.k_const,
            raw.exclusion_radius,
            raw.dims,
        )?;
        p.truncation_warning = raw.truncation_warning;
        Ok(p)
    }
}

impl From<PlacementProblem> for RawProblem {
    fn from(p: PlacementProblem) -> Self {
        let m = p.sites.len();
        let v = (0..m)
            .map(|i| p.v[i * m..(i + 1) * m].to_vec())
            .collect();
        RawProblem {
            sites: p.sites,
            variance: p.variance,
            amplitudes: p.amplitudes,
            gamma: p.gamma,
            v,
            k_const: p.k_const,
            exclusion_radius: p.exclusion_radius,
            dims: p.dims,
            truncation_warning: p.truncation_warning,
        }
    }
}

impl PlacementProblem {
    /// Assemble a problem from precomputed coefficients, checking the
    /// structural invariants (symmetry, V ≥ 0, Cauchy-Schwarz bound on
    /// off-diagonals, Γ_i ≥ −V_ii up to rounding).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        sites: Vec<[f64; 2]>,
        variance: f64,
        amplitudes: Vec<f64>,
        gamma: Vec<f64>,
        v: Vec<f64>,
        k_const: f64,
        exclusion_radius: f64,
        dims: usize,
    ) -> Result<Self> {
        let m = sites.len();
        if m == 0 || m > MAX_SITES {
            return Err(Error::Problem(format!(
                "problem needs 1..={MAX_SITES} sites, got {m}"
            )));
        }
        if dims != 2 && dims != 3 {
            return Err(Error::Problem(format!("dims must be 2 or 3, got {dims}")));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::Problem(format!("variance must be > 0, got {variance}")));
        }
        if exclusion_radius < 0.0 || !exclusion_radius.is_finite() {
            return Err(Error::Problem(format!(
                "exclusion radius must be ≥ 0, got {exclusion_radius}"
            )));
        }
        if amplitudes.len() != m || gamma.len() != m || v.len() != m * m {
            return Err(Error::Problem(format!(
                "coefficient shapes disagree: {m} sites, {} amplitudes, {} gammas, {} V entries",
                amplitudes.len(),
                gamma.len(),
                v.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Problem("amplitudes must be finite and ≥ 0".into()));
        }
        if gamma.iter().any(|g| !g.is_finite())
            || v.iter().any(|x| !x.is_finite())
            || !k_const.is_finite()
        {
            return Err(Error::Problem("non-finite coefficient".into()));
        }
        for i in 0..m {
            for j in 0..m {
                let vij = v[i * m + j];
                if vij < 0.0 {
                    return Err(Error::Problem(format!("V[{i}][{j}] = {vij} < 0")));
                }
                if v[j * m + i] != vij {
                    return Err(Error::Problem(format!("V not symmetric at ({i}, {j})")));
                }
                if i != j {
                    let bound = (v[i * m + i] * v[j * m + j]).sqrt();
                    if vij > bound * (1.0 + 1e-9) + 1e-12 {
                        return Err(Error::Problem(format!(
                            "V[{i}][{j}] = {vij} exceeds the overlap bound {bound}"
                        )));
                    }
                }
            }
            let vii = v[i * m + i];
            if gamma[i] < -vii - 1e-9 * (1.0 + vii) {
                return Err(Error::Problem(format!(
                    "Γ[{i}] = {} below the −V_ii floor {}",
                    gamma[i], -vii
                )));
            }
        }
        Ok(Self {
            sites,
            variance,
            amplitudes,
            gamma,
            v,
            k_const,
            exclusion_radius,
            dims,
            truncation_warning: None,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        false // ≥ 1 site by construction
    }

    pub fn sites(&self) -> &[[f64; 2]] {
        &self.sites
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Linear coefficients Γ_i.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Quadratic coefficient V_ij; the diagonal stores A_i²∫G².
    pub fn v(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.sites.len() + j]
    }

    /// The constant ∫g², reported but never added to costs.
    pub fn k_const(&self) -> f64 {
        self.k_const
    }

    /// Minimum allowed pair distance R (same units as sites); pairs at
    /// distance ≤ R conflict under the exclusion constraint.
    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Set when some site's Gaussian keeps less than 99% of its mass inside
    /// the density grid, so quadrature-based Γ are biased.
    pub fn truncation_warning(&self) -> Option<&str> {
        self.truncation_warning.as_deref()
    }

    /// Per-site conflict bitmask under the exclusion constraint.
    pub fn conflict_masks(&self) -> Vec<u32> {
        let m = self.sites.len();
        let mut masks = vec![0u32; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let d = ((self.sites[i][0] - self.sites[j][0]).powi(2)
                    + (self.sites[i][1] - self.sites[j][1]).powi(2))
                .sqrt();
                if d <= self.exclusion_radius {
                    masks[i] |= 1 << j;
                    masks[j] |= 1 << i;
                }
            }
        }
        masks
    }

    /// Ising cost of a bitstring: −Σ Γ_i n_i + Σ_{i≠j} V_ij n_i n_j (ordered
    /// pairs; K excluded).
    pub fn cost(&self, b: &Bitstring) -> Result<f64> {
        self.cost_with(b, PairConvention::OrderedPairs)
    }

    /// Cost under an explicit pair-sum convention.
    pub fn cost_with(&self, b: &Bitstring, convention: PairConvention) -> Result<f64> {
        let m = self.sites.len();
        if b.len() != m {
            return Err(Error::BitstringLength {
                expected: m,
                got: b.len(),
            });
        }
        let mut acc = 0.0;
        for i in 0..m {
            if !b.get(i) {
                continue;
            }
            acc -= self.gamma[i];
            for j in 0..m {
                if j != i && b.get(j) {
                    let w = match convention {
                        PairConvention::OrderedPairs => self.v[i * m + j],
                        PairConvention::UnorderedPairs => 0.5 * self.v[i * m + j],
                    };
                    acc += w;
                }
            }
        }
        Ok(acc)
    }
}

/// A concrete molecule placement decoded from a bitstring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Selected site coordinates; 2D, or 3D when lifted through a slice
    /// frame.
    pub positions: Vec<Vec<f64>>,
    /// Number of placed molecules (Σ n_i).
    pub count: usize,
    /// Ising cost of the bitstring (K excluded).
    pub cost: f64,
    /// The solution bitstring.
    pub bitstring: Bitstring,
}

/// Compile a 2D density and candidate sites into a placement problem.
///
/// `g` should be normalized (non-negative, unit trapezoidal integral) for
/// the Γ values to carry their L²-fit meaning; `sites` are in `g`'s own
/// coordinates, as are `exclusion_radius` and √`variance`. `amplitudes`
/// defaults to all ones.
pub fn compile_problem(
    g: &ScalarField,
    sites: &[[f64; 2]],
    variance: f64,
    amplitudes: Option<&[f64]>,
    exclusion_radius: f64,
) -> Result<PlacementProblem> {
    if g.dims() != 2 {
        return Err(Error::Problem(format!(
            "compilation needs a 2D density, got {}D",
            g.dims()
        )));
    }
    let m = sites.len();
    if m == 0 || m > MAX_SITES {
        return Err(Error::Problem(format!(
            "problem needs 1..={MAX_SITES} sites, got {m}"
        )));
    }
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::Problem(format!("variance must be > 0, got {variance}")));
    }
    let amplitudes: Vec<f64> = match amplitudes {
        Some(a) => {
            if a.len() != m {
                return Err(Error::Problem(format!(
                    "{} amplitudes for {m} sites",
                    a.len()
                )));
            }
            a.to_vec()
        }
        None => vec![1.0; m],
    };

    let lo = [g.origin()[0], g.origin()[1]];
    let hi = [
        lo[0] + (g.shape()[0] - 1) as f64 * g.spacing()[0],
        lo[1] + (g.shape()[1] - 1) as f64 * g.spacing()[1],
    ];
    for (i, s) in sites.iter().enumerate() {
        if !s.iter().all(|v| v.is_finite()) {
            return Err(Error::Problem(format!("site {i} is not finite")));
        }
        let eps = 1e-9 * (g.spacing()[0] + g.spacing()[1]);
        if s[0] < lo[0] - eps || s[0] > hi[0] + eps || s[1] < lo[1] - eps || s[1] > hi[1] + eps {
            return Err(Error::Problem(format!(
                "site {i} at {s:?} lies outside the density grid [{lo:?}, {hi:?}]"
            )));
        }
    }

    let self_overlap = interaction(variance, 2, 0.0);
    let sigma = variance.sqrt();

    let mut gamma = Vec::with_capacity(m);
    let mut v = vec![0.0; m * m];
    let mut worst_mass = (1.0f64, 0usize);
    for i in 0..m {
        let kernel = GaussianComponent::new(vec![sites[i][0], sites[i][1]], variance);
        let cross = g.integrate(|val, p| val * kernel.density_at(p));
        let vii = amplitudes[i] * amplitudes[i] * self_overlap;
        gamma.push(2.0 * amplitudes[i] * cross - vii);
        v[i * m + i] = vii;

        // Fraction of the site Gaussian's mass inside the grid box.
        let mass = (0..2)
            .map(|ax| {
                normal_cdf((hi[ax] - sites[i][ax]) / sigma)
                    - normal_cdf((lo[ax] - sites[i][ax]) / sigma)
            })
            .product::<f64>();
        if mass < worst_mass.0 {
            worst_mass = (mass, i);
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let r = ((sites[i][0] - sites[j][0]).powi(2) + (sites[i][1] - sites[j][1]).powi(2))
                .sqrt();
            let vij = amplitudes[i] * amplitudes[j] * interaction(variance, 2, r);
            v[i * m + j] = vij;
            v[j * m + i] = vij;
        }
    }

    let k_const = g.integrate(|val, _| val * val);

    let mut problem = PlacementProblem::from_parts(
        sites.to_vec(),
        variance,
        amplitudes,
        gamma,
        v,
        k_const,
        exclusion_radius,
        2,
    )?;
    if worst_mass.0 < 0.99 {
        problem.truncation_warning = Some(format!(
            "site {} keeps only {:.1}% of its Gaussian mass on the grid; Γ is biased low",
            worst_mass.1,
            worst_mass.0 * 100.0
        ));
    }
    Ok(problem)
}

/// Exhaustive constrained minimization of the Ising cost.
///
/// Branch and bound over all bitstrings; with `enforce_exclusion`, pairs at
/// distance ≤ R are never excited together. Ties break toward fewer
/// excitations, then toward exciting lower-indexed sites.
pub fn exact_solve(problem: &PlacementProblem, enforce_exclusion: bool) -> Placement {
    let m = problem.len();
    let conflicts = if enforce_exclusion {
        problem.conflict_masks()
    } else {
        vec![0u32; m]
    };

    // Largest possible remaining gain: only positive Γ can lower the cost
    // (V ≥ 0 never does). suffix_gain[k] = Σ_{i ≥ k} max(Γ_i, 0).
    let mut suffix_gain = vec![0.0f64; m + 1];
    for i in (0..m).rev() {
        suffix_gain[i] = suffix_gain[i + 1] + problem.gamma()[i].max(0.0);
    }
    // Pruning slack ≫ accumulation drift so exact-tie candidates survive to
    // the canonical comparator.
    let magnitude: f64 = problem.gamma().iter().map(|g| g.abs()).sum::<f64>()
        + (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| problem.v(i, j))
            .sum::<f64>();
    let slack = 1e-9 * (1.0 + magnitude);

    struct Best {
        bits: Option<Bitstring>,
        cost: f64,
    }
    let mut best = Best {
        bits: None,
        cost: f64::INFINITY,
    };

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        depth: usize,
        chosen: u32,
        acc: f64,
        problem: &PlacementProblem,
        conflicts: &[u32],
        suffix_gain: &[f64],
        slack: f64,
        best: &mut Best,
    ) {
        let m = problem.len();
        if acc - suffix_gain[depth] > best.cost + slack {
            return;
        }
        if depth == m {
            let bits = Bitstring::new(chosen, m).expect("mask within length");
            let canonical = problem.cost(&bits).expect("lengths match");
            let better = match &best.bits {
                None => true,
                Some(current) => {
                    canonical < best.cost
                        || (canonical == best.cost
                            && (bits.count_ones() < current.count_ones()
                                || (bits.count_ones() == current.count_ones()
                                    && bits.cmp_indices(current) == std::cmp::Ordering::Less)))
                }
            };
            if better {
                best.cost = canonical;
                best.bits = Some(bits);
            }
            return;
        }
        // Include-first in index order so lex-preferred candidates are seen
        // early (helps pruning; correctness rests on the comparator alone).
        if conflicts[depth] & chosen == 0 {
            let mut delta = -problem.gamma()[depth];
            let mut rest = chosen;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                delta += 2.0 * problem.v(depth, j);
                rest &= rest - 1;
            }
            dfs(
                depth + 1,
                chosen | (1 << depth),
                acc + delta,
                problem,
                conflicts,
                suffix_gain,
                slack,
                best,
            );
        }
        dfs(
            depth + 1,
            chosen,
            acc,
            problem,
            conflicts,
            suffix_gain,
            slack,
            best,
        );
    }
    dfs(0, 0, 0.0, problem, &conflicts, &suffix_gain, slack, &mut best);

    let bits = best.bits.expect("at least the all-zero assignment is admissible");
    extract_placement(problem, &bits, None).expect("solver bitstring matches problem")
}

/// Pick the cheapest bitstring from a set of candidates — the selection rule
/// every sampling-based solver reports with. Ties break exactly as in
/// [`exact_solve`]: fewer excitations first, then the lexicographically
/// smaller excited-index list.
pub fn min_cost_bitstring<'a>(
    problem: &PlacementProblem,
    candidates: impl IntoIterator<Item = &'a Bitstring>,
) -> Result<Option<(Bitstring, f64)>> {
    let mut best: Option<(Bitstring, f64)> = None;
    for bits in candidates {
        let cost = problem.cost(bits)?;
        let better = match &best {
            None => true,
            Some((current, best_cost)) => {
                cost < *best_cost
                    || (cost == *best_cost
                        && (bits.count_ones() < current.count_ones()
                            || (bits.count_ones() == current.count_ones()
                                && bits.cmp_indices(current) == std::cmp::Ordering::Less)))
            }
        };
        if better {
            best = Some((*bits, cost));
        }
    }
    Ok(best)
}

/// Decode a bitstring into a placement: the excited sites' coordinates,
/// lifted to 3D through `frame` when one is given.
pub fn extract_placement(
    problem: &PlacementProblem,
    b: &Bitstring,
    frame: Option<&SliceFrame>,
) -> Result<Placement> {
    let cost = problem.cost(b)?;
    let positions = b
        .indices()
        .into_iter()
        .map(|i| {
            let s = problem.sites()[i];
            match frame {
                Some(f) => f.lift([s[0], s[1]]).to_vec(),
                None => vec![s[0], s[1]],
            }
        })
        .collect::<Vec<_>>();
    Ok(Placement {
        count: positions.len(),
        positions,
        cost,
        bitstring: *b,
    })
}
