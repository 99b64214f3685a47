//! Physical qubit registers: site placement over a density, trap-layout
//! fitting, and the Rydberg blockade graph with a classical MIS oracle.
//!
//! Register coordinates are micrometres. Density fields keep their own
//! (ångström-scale) units; a [`GridFrame`] on each register records the
//! affine map between the two, fixed by pinning the candidate-lattice pitch
//! to the physical nearest-neighbor spacing (5 µm on the machines this
//! models). Up to 25 sites — the exact solvers downstream are the ceiling,
//! not the hardware.

use serde::{Deserialize, Serialize};

use crate::field::ScalarField;
use crate::pulse::DEFAULT_OMEGA_MAX;
use crate::{Error, Result};

/// Default van der Waals coefficient C₆ ≈ 5.42 × 10¹² rad/s·µm⁶
/// (≡ 5 420 158.53 rad/µs·µm⁶, the published value for the 70S₁/₂ Rb level
/// used by public neutral-atom machines).
pub const DEFAULT_C6: f64 = 5.42e12;

/// Largest register the crate accepts.
pub const MAX_SITES: usize = 25;

/// Blockade radius from the resonance condition `C₆/r⁶ = Ω`:
/// `r_b = (C₆/Ω)^{1/6}`. With the defaults this is ≈ 8.69 µm.
pub fn blockade_radius_for(c6: f64, omega: f64) -> f64 {
    (c6 / omega).powf(1.0 / 6.0)
}

/// Affine map between density-grid coordinates and register micrometres:
/// `µm = (grid − grid_origin)·scale + um_origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    /// Micrometres per grid length unit.
    pub scale: f64,
    /// Grid-coordinate anchor.
    pub grid_origin: [f64; 2],
    /// Micrometre coordinate the anchor maps to.
    pub um_origin: [f64; 2],
}

impl GridFrame {
    /// The identity map (1 µm per grid unit, no shift).
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            grid_origin: [0.0, 0.0],
            um_origin: [0.0, 0.0],
        }
    }

    /// Grid coordinates → micrometres.
    pub fn to_um(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.grid_origin[0]) * self.scale + self.um_origin[0],
            (p[1] - self.grid_origin[1]) * self.scale + self.um_origin[1],
        ]
    }

    /// Micrometres → grid coordinates.
    pub fn to_grid(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.um_origin[0]) / self.scale + self.grid_origin[0],
            (p[1] - self.um_origin[1]) / self.scale + self.grid_origin[1],
        ]
    }
}

impl Default for GridFrame {
    fn default() -> Self {
        Self::identity()
    }
}

/// A 2D arrangement of trapped atoms with its interaction constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegister", into = "RawRegister")]
pub struct Register {
    sites: Vec<[f64; 2]>,
    c6: f64,
    blockade_radius: f64,
    grid_frame: GridFrame,
}

#[derive(Serialize, Deserialize)]
struct RawRegister {
    sites: Vec<[f64; 2]>,
    c6: f64,
    blockade_radius: f64,
    #[serde(default)]
    grid_frame: GridFrame,
}

impl TryFrom<RawRegister> for Register {
    type Error = Error;
    fn try_from(raw: RawRegister) -> Result<Self> {
        Register::new(raw.sites, raw.c6, raw.blockade_radius)
            .map(|r| r.with_grid_frame(raw.grid_frame))
    }
}

impl From<Register> for RawRegister {
    fn from(r: Register) -> Self {
        RawRegister {
            sites: r.sites,
            c6: r.c6,
            blockade_radius: r.blockade_radius,
            grid_frame: r.grid_frame,
        }
    }
}

impl Register {
    /// Build a register, checking the site-count and distinctness invariants.
    pub fn new(sites: Vec<[f64; 2]>, c6: f64, blockade_radius: f64) -> Result<Self> {
        if sites.is_empty() || sites.len() > MAX_SITES {
            return Err(Error::Register(format!(
                "register needs 1..={MAX_SITES} sites, got {}",
                sites.len()
            )));
        }
        if sites.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Register("non-finite site coordinate".into()));
        }
        for i in 0..sites.len() {
            for j in (i + 1)..sites.len() {
                if sites[i] == sites[j] {
                    return Err(Error::Register(format!(
                        "sites {i} and {j} coincide at {:?}",
                        sites[i]
                    )));
                }
            }
        }
        if !(c6 > 0.0) || !(blockade_radius > 0.0) {
            return Err(Error::Register(format!(
                "C6 and blockade radius must be positive (got {c6}, {blockade_radius})"
            )));
        }
        Ok(Self {
            sites,
            c6,
            blockade_radius,
            grid_frame: GridFrame::identity(),
        })
    }

    /// Same register with default hardware constants.
    pub fn with_default_hardware(sites: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(
            sites,
            DEFAULT_C6,
            blockade_radius_for(DEFAULT_C6, DEFAULT_OMEGA_MAX),
        )
    }

    /// Attach a grid↔µm frame.
    pub fn with_grid_frame(mut self, frame: GridFrame) -> Self {
        self.grid_frame = frame;
        self
    }

    /// Site coordinates in micrometres.
    pub fn sites(&self) -> &[[f64; 2]] {
        &self.sites
    }

    /// Number of qubits.
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    /// Always false (the constructor rejects empty registers); here so
    /// clippy-style `len`/`is_empty` pairing holds.
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Van der Waals coefficient, rad/s·µm⁶.
    pub fn c6(&self) -> f64 {
        self.c6
    }

    /// Blockade radius, µm.
    pub fn blockade_radius(&self) -> f64 {
        self.blockade_radius
    }

    /// The density-grid ↔ µm frame.
    pub fn grid_frame(&self) -> &GridFrame {
        &self.grid_frame
    }

    /// Euclidean distance between two sites, µm.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.sites[i], self.sites[j]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    /// Pair interaction `U_ij = C₆/|r_ij|⁶`, rad/s.
    pub fn interaction_strength(&self, i: usize, j: usize) -> f64 {
        self.c6 / self.distance(i, j).powi(6)
    }

    /// Largest pairwise interaction — the `U_max` entering integration-step
    /// bounds. Zero for a single site.
    pub fn max_interaction(&self) -> f64 {
        let mut u = 0.0f64;
        for i in 0..self.sites.len() {
            for j in (i + 1)..self.sites.len() {
                u = u.max(self.interaction_strength(i, j));
            }
        }
        u
    }

    /// Site positions mapped back to density-grid coordinates.
    pub fn sites_in_grid_coords(&self) -> Vec<[f64; 2]> {
        self.sites
            .iter()
            .map(|&p| self.grid_frame.to_grid(p))
            .collect()
    }
}

/// Lay a triangular lattice of candidate traps over `field`'s bounding box,
/// keep the candidates whose (bilinear) density reaches `threshold` of the
/// field maximum, and map the survivors to micrometres so that lattice
/// neighbors sit `lattice_spacing_um` apart.
///
/// `pitch` is the candidate-lattice spacing in the field's own length units;
/// it fixes how densely the density is probed and, together with
/// `lattice_spacing_um`, the grid→µm scale. Hardware constants are the
/// documented defaults; override with [`Register::new`] + `with_grid_frame`
/// if needed.
pub fn build_register(
    field: &ScalarField,
    threshold: f64,
    lattice_spacing_um: f64,
    pitch: f64,
) -> Result<Register> {
    if field.dims() != 2 {
        return Err(Error::Register(format!(
            "register construction needs a 2D field, got {}D",
            field.dims()
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Register(format!(
            "threshold must be in (0, 1), got {threshold}"
        )));
    }
    if !(lattice_spacing_um > 0.0) || !(pitch > 0.0) {
        return Err(Error::Register(format!(
            "spacings must be positive (got {lattice_spacing_um} µm, pitch {pitch})"
        )));
    }
    let max = field.max_value();
    if !(max > 0.0) {
        return Err(Error::Register("field has no positive density".into()));
    }

    let lo = [field.origin()[0], field.origin()[1]];
    let hi = [
        lo[0] + (field.shape()[0] - 1) as f64 * field.spacing()[0],
        lo[1] + (field.shape()[1] - 1) as f64 * field.spacing()[1],
    ];
    let row_height = pitch * 3f64.sqrt() / 2.0;
    let eps = 1e-9 * pitch;

    let mut selected: Vec<[f64; 2]> = Vec::new();
    let cutoff = threshold * max;
    let mut row = 0usize;
    loop {
        let y = lo[1] + row as f64 * row_height;
        if y > hi[1] + eps {
            break;
        }
        let x0 = lo[0] + if row % 2 == 1 { pitch / 2.0 } else { 0.0 };
        let mut col = 0usize;
        loop {
            let x = x0 + col as f64 * pitch;
            if x > hi[0] + eps {
                break;
            }
            if field.interpolate(&[x, y]) >= cutoff {
                selected.push([x, y]);
            }
            col += 1;
        }
        row += 1;
    }

    if selected.is_empty() {
        return Err(Error::Register(format!(
            "no candidate trap reaches {threshold} of the field maximum"
        )));
    }
    if selected.len() > MAX_SITES {
        return Err(Error::Register(format!(
            "{} sites selected, ceiling is {MAX_SITES}; raise the threshold or the pitch",
            selected.len()
        )));
    }

    // Center on the selected centroid and scale so lattice neighbors land
    // `lattice_spacing_um` apart.
    let scale = lattice_spacing_um / pitch;
    let centroid = [
        selected.iter().map(|p| p[0]).sum::<f64>() / selected.len() as f64,
        selected.iter().map(|p| p[1]).sum::<f64>() / selected.len() as f64,
    ];
    let frame = GridFrame {
        scale,
        grid_origin: centroid,
        um_origin: [0.0, 0.0],
    };
    let sites: Vec<[f64; 2]> = selected.iter().map(|&p| frame.to_um(p)).collect();

    let c6 = DEFAULT_C6;
    Register::new(sites, c6, blockade_radius_for(c6, DEFAULT_OMEGA_MAX))
        .map(|r| r.with_grid_frame(frame))
}

/// Move a register onto a physical trap layout.
///
/// Finds the rigid translation plus injective site→trap assignment that
/// minimizes the total squared displacement, exactly for the assignment and
/// over a finite translation search (every trap−site pairing, plus the
/// centroid match) refined to a fixed point. The returned register's sites
/// are trap coordinates; its grid frame absorbs the rigid translation so
/// density↔µm lookups stay consistent up to the per-site snap.
pub fn fit_to_traps(register: &Register, layout: &[[f64; 2]]) -> Result<Register> {
    let n = register.len();
    let m = layout.len();
    if m < n {
        return Err(Error::Register(format!(
            "layout has {m} traps, register needs {n}"
        )));
    }
    if layout.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Register("non-finite trap coordinate".into()));
    }
    let sites = register.sites();

    let centroid = |pts: &[[f64; 2]]| -> [f64; 2] {
        [
            pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64,
            pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64,
        ]
    };

    // Candidate rigid translations: centroid alignment plus every pairing.
    let (cs, cl) = (centroid(sites), centroid(layout));
    let mut candidates = vec![[cl[0] - cs[0], cl[1] - cs[1]]];
    for s in sites {
        for t in layout {
            candidates.push([t[0] - s[0], t[1] - s[1]]);
        }
    }

    let solve_at = |t: [f64; 2]| -> (f64, Vec<usize>) {
        let mut cost = vec![0.0; n * m];
        for (i, s) in sites.iter().enumerate() {
            for (j, trap) in layout.iter().enumerate() {
                let dx = s[0] + t[0] - trap[0];
                let dy = s[1] + t[1] - trap[1];
                cost[i * m + j] = dx * dx + dy * dy;
            }
        }
        min_cost_assignment(&cost, n, m)
    };

    // Residual ties (e.g. a single site reaches any trap exactly) resolve
    // toward the smallest rigid translation, so degenerate fits snap to the
    // nearest trap instead of an arbitrary one.
    let mut best_cost = f64::INFINITY;
    let mut best_t_norm = f64::INFINITY;
    let mut best_assign = Vec::new();
    let mut best_t = [0.0, 0.0];
    for &t in &candidates {
        let (c, assign) = solve_at(t);
        let t_norm = t[0] * t[0] + t[1] * t[1];
        let replace = if best_assign.is_empty() {
            true
        } else {
            let eps = 1e-9 * (1.0 + c.abs().max(best_cost.abs()));
            c < best_cost - eps || ((c - best_cost).abs() <= eps && t_norm < best_t_norm)
        };
        if replace {
            best_cost = c;
            best_t_norm = t_norm;
            best_assign = assign;
            best_t = t;
        }
    }

    // Alternate exact-translation / exact-assignment until the residual
    // stops improving (ICP on a finite solution set: terminates).
    for _ in 0..50 {
        let t = {
            let mut acc = [0.0, 0.0];
            for (i, &j) in best_assign.iter().enumerate() {
                acc[0] += layout[j][0] - sites[i][0];
                acc[1] += layout[j][1] - sites[i][1];
            }
            [acc[0] / n as f64, acc[1] / n as f64]
        };
        let (c, assign) = solve_at(t);
        let eps = 1e-9 * (1.0 + c.abs().max(best_cost.abs()));
        if c < best_cost - eps {
            best_cost = c;
            best_assign = assign;
            best_t = t;
        } else {
            break;
        }
    }

    let new_sites: Vec<[f64; 2]> = best_assign.iter().map(|&j| layout[j]).collect();
    let mut frame = register.grid_frame().clone();
    frame.um_origin[0] += best_t[0];
    frame.um_origin[1] += best_t[1];
    Register::new(new_sites, register.c6(), register.blockade_radius())
        .map(|r| r.with_grid_frame(frame))
}

/// Exact min-cost assignment of `n` rows to `m ≥ n` columns by shortest
/// augmenting paths (the classic Hungarian/Jonker-Volgenant scheme on f64).
/// Returns the total cost and the column picked for each row.
fn min_cost_assignment(cost: &[f64], n: usize, m: usize) -> (f64, Vec<usize>) {
    debug_assert_eq!(cost.len(), n * m);
    debug_assert!(n <= m);
    // 1-based potentials; p[j] = row matched to column j (0 = free).
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        // Unwind the augmenting path.
        while j0 != 0 {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        }
    }

    let mut assign = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    let total = assign
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * m + j])
        .sum();
    (total, assign)
}

/// Geometric conflict graph: an edge wherever two sites sit within the
/// blockade radius of each other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct BlockadeGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    weights: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl TryFrom<RawGraph> for BlockadeGraph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        let mut g = BlockadeGraph::new(raw.node_count, raw.edges)?;
        if let Some(w) = raw.weights {
            g = g.with_weights(w)?;
        }
        Ok(g)
    }
}

impl From<BlockadeGraph> for RawGraph {
    fn from(g: BlockadeGraph) -> Self {
        RawGraph {
            node_count: g.node_count,
            edges: g.edges,
            weights: g.weights,
        }
    }
}

impl BlockadeGraph {
    /// Build a graph from undirected edges; self-loops are rejected, pairs
    /// are normalized to `i < j`, deduplicated, and sorted.
    pub fn new(node_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::Register(format!("self-loop on node {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::Register(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Self {
            node_count,
            edges: normalized,
            weights: None,
        })
    }

    /// Attach per-node weights (used only to break MIS ties).
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.node_count {
            return Err(Error::Register(format!(
                "{} weights for {} nodes",
                weights.len(),
                self.node_count
            )));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Normalized edge list (i < j, sorted).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Optional per-node weights.
    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Adjacency as one bitmask per node (node count ≤ 25 ⇒ u32 is enough).
    pub fn adjacency_masks(&self) -> Vec<u32> {
        let mut adj = vec![0u32; self.node_count];
        for &(a, b) in &self.edges {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        adj
    }

    /// Neighbor indices of `i`, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }
}

/// Edges between every pair of sites at distance ≤ `blockade_radius`
/// (inclusive: touching the radius blockades).
pub fn blockade_graph(register: &Register, blockade_radius: f64) -> Result<BlockadeGraph> {
    if !(blockade_radius > 0.0) {
        return Err(Error::Register(format!(
            "blockade radius must be positive, got {blockade_radius}"
        )));
    }
    let n = register.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if register.distance(i, j) <= blockade_radius {
                edges.push((i, j));
            }
        }
    }
    BlockadeGraph::new(n, edges)
}

/// Exhaustive maximum independent set with documented tie-breaks.
///
/// Order of preference: larger cardinality, then larger total node weight
/// (when weights are attached), then the lexicographically smallest sorted
/// index list — so among equal-size, equal-weight sets the one preferring
/// lower-indexed nodes wins. Branch and bound over ≤ 25 nodes; panics above
/// the ceiling.
pub fn mis_bruteforce(graph: &BlockadeGraph) -> Vec<usize> {
    let n = graph.node_count();
    assert!(n <= MAX_SITES, "MIS oracle is capped at {MAX_SITES} nodes");
    if n == 0 {
        return Vec::new();
    }
    let adj = graph.adjacency_masks();
    let weights = graph.weights();

    struct Best {
        mask: u32,
        count: u32,
        weight: f64,
    }
    let weight_of = |mask: u32| -> f64 {
        match weights {
            None => 0.0,
            Some(w) => {
                // Fixed ascending-index summation order for determinism.
                let mut acc = 0.0;
                let mut m = mask;
                while m != 0 {
                    acc += w[m.trailing_zeros() as usize];
                    m &= m - 1;
                }
                acc
            }
        }
    };
    // Lexicographic comparison of the sorted index lists encoded in masks.
    fn lex_smaller(a: u32, b: u32) -> bool {
        let (mut a, mut b) = (a, b);
        while a != 0 && b != 0 {
            let (ia, ib) = (a.trailing_zeros(), b.trailing_zeros());
            if ia != ib {
                return ia < ib;
            }
            a &= a - 1;
            b &= b - 1;
        }
        a == 0 && b != 0
    }

    let mut best = Best {
        mask: 0,
        count: 0,
        weight: 0.0,
    };
    // Include-first DFS in index order; prune when even taking every
    // remaining node cannot reach the best cardinality.
    fn rec(
        i: usize,
        n: usize,
        chosen: u32,
        adj: &[u32],
        best: &mut Best,
        weight_of: &dyn Fn(u32) -> f64,
    ) {
        let count = chosen.count_ones();
        if count + ((n - i) as u32) < best.count {
            return;
        }
        if i == n {
            let weight = weight_of(chosen);
            let better = count > best.count
                || (count == best.count
                    && (weight > best.weight
                        || (weight == best.weight && lex_smaller(chosen, best.mask))));
            if better {
                *best = Best {
                    mask: chosen,
                    count,
                    weight,
                };
            }
            return;
        }
        if adj[i] & chosen == 0 {
            rec(i + 1, n, chosen | (1 << i), adj, best, weight_of);
        }
        rec(i + 1, n, chosen, adj, best, weight_of);
    }
    rec(0, n, 0, &adj, &mut best, &weight_of);

    let mut out = Vec::with_capacity(best.count as usize);
    let mut m = best.mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_matches_hand_example() {
        // Rows pick distinct columns: optimal is 1+2+2 = 5 (r0→c1, r1→c0,
        // r2→c2... check: costs [[4,1,3],[2,0,5],[3,2,2]] → 1+2+2 = 5).
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let (total, assign) = min_cost_assignment(&cost, 3, 3);
        assert_eq!(total, 5.0);
        assert_eq!(assign, vec![1, 0, 2]);
    }

    #[test]
    fn assignment_rectangular_uses_best_columns() {
        // 1 row, 3 columns.
        let cost = [7.0, 2.0, 9.0];
        let (total, assign) = min_cost_assignment(&cost, 1, 3);
        assert_eq!(total, 2.0);
        assert_eq!(assign, vec![1]);
    }

    #[test]
    fn assignment_matches_bruteforce_on_random_instances() {
        // Deterministic LCG instances, brute force over column permutations.
        let mut state = 0x243F6A8885A308D3u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _case in 0..50 {
            let n = 2 + (next() * 4.0) as usize; // 2..=5
            let m = n + (next() * 3.0) as usize; // n..=n+2
            let cost: Vec<f64> = (0..n * m).map(|_| next()).collect();
            let (total, assign) = min_cost_assignment(&cost, n, m);

            // Injectivity.
            let mut seen = vec![false; m];
            for &j in &assign {
                assert!(!seen[j]);
                seen[j] = true;
            }
            // Exhaustive oracle.
            let mut best = f64::INFINITY;
            let mut cols: Vec<usize> = (0..m).collect();
            permute(&mut cols, n, &mut |perm| {
                let c: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * m + j]).sum();
                if c < best {
                    best = c;
                }
            });
            assert!(
                (total - best).abs() < 1e-12,
                "solver {total} vs oracle {best}"
            );
        }
    }

    /// Visit every ordered selection of `k` items from `items`.
    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        fn rec(items: &mut Vec<usize>, depth: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
            if depth == k {
                visit(&items[..k]);
                return;
            }
            for i in depth..items.len() {
                items.swap(depth, i);
                rec(items, depth + 1, k, visit);
                items.swap(depth, i);
            }
        }
        rec(items, 0, k, visit);
    }

    #[test]
    fn grid_frame_round_trips() {
        let f = GridFrame {
            scale: 2.5,
            grid_origin: [3.0, -1.0],
            um_origin: [10.0, 20.0],
        };
        let p = [7.3, 0.2];
        let um = f.to_um(p);
        let back = f.to_grid(um);
        assert!((back[0] - p[0]).abs() < 1e-12);
        assert!((back[1] - p[1]).abs() < 1e-12);
    }

    #[test]
    fn register_rejects_duplicates_and_oversize() {
        assert!(Register::with_default_hardware(vec![[0.0, 0.0], [0.0, 0.0]]).is_err());
        assert!(Register::with_default_hardware(vec![]).is_err());
        let many: Vec<[f64; 2]> = (0..26).map(|i| [i as f64, 0.0]).collect();
        assert!(Register::with_default_hardware(many).is_err());
    }

    #[test]
    fn default_blockade_radius_is_8_69_um() {
        let r = blockade_radius_for(DEFAULT_C6, DEFAULT_OMEGA_MAX);
        assert!((r - 8.69).abs() < 0.01, "r_b = {r}");
    }
}
