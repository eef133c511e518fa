//! Simple random walk on Sierpinski gasket graphs.
//!
//! Generation 1 is a single triangle; generation `n` glues three copies of
//! generation `n - 1` at their shared corners. The walk starts at the top
//! corner and is absorbed on a target vertex set; its exit law is computed
//! exactly from the Dirichlet problem on the remaining vertices.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{par_replicates, RngStream};
use crate::stats::entropy_unchecked;

pub const MAX_GENERATION: u32 = 12;
pub const MAX_SCAN_GENERATION: u32 = 9;

const CG_RELATIVE_TOL: f64 = 1e-15;
const MAX_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexRole {
    Top,
    Bottom,
    Side,
    Interior,
}

impl VertexRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            VertexRole::Top => "top",
            VertexRole::Bottom => "bottom",
            VertexRole::Side => "side",
            VertexRole::Interior => "interior",
        }
    }
}

/// Generation-`n` gasket graph. Vertices are ordered lexicographically by
/// `(x, y)`; the outer triangle has unit side with its base on `y = 0`.
#[derive(Debug, Clone)]
pub struct GasketGraph {
    generation: u32,
    coords: Vec<[f64; 2]>,
    roles: Vec<VertexRole>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    top: usize,
    bottom_side: Vec<usize>,
    left_side: Vec<usize>,
    right_side: Vec<usize>,
}

impl GasketGraph {
    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn role(&self, v: usize) -> VertexRole {
        self.roles[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// Bottom side ordered left to right, `2^(n-1) + 1` vertices.
    pub fn bottom_side(&self) -> &[usize] {
        &self.bottom_side
    }

    /// Union of the three sides of the outer triangle, in id order.
    pub fn boundary(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .bottom_side
            .iter()
            .chain(&self.left_side)
            .chain(&self.right_side)
            .copied()
            .collect();
        set.into_iter().collect()
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_count())
            .flat_map(|u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Vertex with the mirrored x coordinate.
    pub fn mirror(&self, v: usize) -> usize {
        let [x, y] = self.coords[v];
        let target = [1.0 - x, y];
        // coordinates are dyadic rationals times fixed factors, so exact lookups are safe
        self.coords
            .iter()
            .position(|c| (c[0] - target[0]).abs() < 1e-12 && (c[1] - target[1]).abs() < 1e-12)
            .expect("the gasket is mirror symmetric")
    }

    /// Edge list CSV with header `u,v`.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "v"])?;
        for (u, v) in self.edges() {
            w.write_record([u.to_string(), v.to_string()])?;
        }
        w.flush()
    }

    /// Vertex CSV with header `id,x,y,role`.
    pub fn write_vertices_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "x", "y", "role"])?;
        for (i, c) in self.coords.iter().enumerate() {
            w.write_record([i.to_string(), c[0].to_string(), c[1].to_string(), self.roles[i].as_str().to_string()])?;
        }
        w.flush()
    }
}

/// Closed-form vertex count `3 (3^(n-1) + 1) / 2`.
pub fn expected_vertex_count(n: u32) -> usize {
    3 * (3usize.pow(n - 1) + 1) / 2
}

/// Closed-form bottom side size `2^(n-1) + 1`.
pub fn expected_side_size(n: u32) -> usize {
    (1usize << (n - 1)) + 1
}

/// Builds generation `n` (1 = triangle) by tripling and gluing.
pub fn build_gasket(n: u32) -> Result<GasketGraph> {
    if !(1..=MAX_GENERATION).contains(&n) {
        return Err(Error::param("n", format!("generation must be in 1..={MAX_GENERATION}, got {n}")));
    }
    // lattice coordinates (a, b) for the point a*(1,0) + b*(1/2, sqrt(3)/2)
    let mut points: Vec<(i64, i64)> = vec![(0, 0), (1, 0), (0, 1)];
    let mut edges: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (1, 2)];
    let mut side: i64 = 1;
    for _ in 1..n {
        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut next_points = Vec::with_capacity(points.len() * 3);
        let mut next_edges = BTreeSet::new();
        for (da, db) in [(0, 0), (side, 0), (0, side)] {
            let ids: Vec<usize> = points
                .iter()
                .map(|&(a, b)| {
                    let key = (a + da, b + db);
                    *index.entry(key).or_insert_with(|| {
                        next_points.push(key);
                        next_points.len() - 1
                    })
                })
                .collect();
            for &(u, v) in &edges {
                let (p, q) = (ids[u], ids[v]);
                next_edges.insert((p.min(q), p.max(q)));
            }
        }
        points = next_points;
        edges = next_edges.into_iter().collect();
        side *= 2;
    }

    // canonical order: lexicographic in (x, y); 2x = 2a + b is an exact key
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (2 * points[i].0 + points[i].1, points[i].1));
    let mut rank = vec![0; points.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let points: Vec<(i64, i64)> = order.iter().map(|&i| points[i]).collect();

    let count = points.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); count];
    for &(u, v) in &edges {
        adj[rank[u]].push(rank[v]);
        adj[rank[v]].push(rank[u]);
    }
    let mut offsets = Vec::with_capacity(count + 1);
    let mut neighbors = Vec::with_capacity(2 * edges.len());
    offsets.push(0);
    for list in &mut adj {
        list.sort_unstable();
        neighbors.extend_from_slice(list);
        offsets.push(neighbors.len());
    }

    let l = side as f64;
    let coords = points
        .iter()
        .map(|&(a, b)| [(a as f64 + 0.5 * b as f64) / l, b as f64 * 3f64.sqrt() / 2.0 / l])
        .collect();
    let roles: Vec<VertexRole> = points
        .iter()
        .map(|&(a, b)| {
            if (a, b) == (0, side) {
                VertexRole::Top
            } else if b == 0 {
                VertexRole::Bottom
            } else if a == 0 || a + b == side {
                VertexRole::Side
            } else {
                VertexRole::Interior
            }
        })
        .collect();
    let top = points.iter().position(|&p| p == (0, side)).expect("top corner exists");
    let bottom_side: Vec<usize> = (0..count).filter(|&i| points[i].1 == 0).collect();
    let left_side: Vec<usize> = (0..count).filter(|&i| points[i].0 == 0).collect();
    let right_side: Vec<usize> = (0..count).filter(|&i| points[i].0 + points[i].1 == side).collect();

    Ok(GasketGraph {
        generation: n,
        coords,
        roles,
        offsets,
        neighbors,
        top,
        bottom_side,
        left_side,
        right_side,
    })
}

/// Exit distribution of a walk over a target vertex list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingLaw {
    pub targets: Vec<usize>,
    pub probs: Vec<f64>,
    /// Largest `||(I - Q) h - r||_inf` over the per-target solves (0 for
    /// trivial or Monte Carlo laws).
    pub max_residual: f64,
}

impl HittingLaw {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Solver {
    /// Jacobi-preconditioned conjugate gradient on `D - A` restricted to the
    /// transient vertices (symmetric positive definite).
    ConjugateGradient,
    /// Dense LU of `I - Q`; for small graphs and cross-checks.
    DenseLu,
}

/// Largest transient block accepted by [`Solver::DenseLu`].
pub const DENSE_LU_MAX: usize = 2048;

fn check_targets(g: &GasketGraph, start: usize, absorbing: &[usize]) -> Result<Vec<usize>> {
    if absorbing.is_empty() {
        return Err(Error::Empty("absorbing set"));
    }
    let n = g.vertex_count();
    if start >= n {
        return Err(Error::param("start", format!("vertex {start} not in graph of {n} vertices")));
    }
    if let Some(&v) = absorbing.iter().find(|&&v| v >= n) {
        return Err(Error::param("absorbing", format!("vertex {v} not in graph of {n} vertices")));
    }
    let mut seen = BTreeSet::new();
    Ok(absorbing.iter().copied().filter(|v| seen.insert(*v)).collect())
}

/// Exact absorption law of simple random walk from `start` on `absorbing`,
/// by one conjugate-gradient solve per target.
pub fn hitting_distribution(g: &GasketGraph, start: usize, absorbing: &[usize]) -> Result<HittingLaw> {
    hitting_distribution_with(g, start, absorbing, Solver::ConjugateGradient)
}

pub fn hitting_distribution_with(
    g: &GasketGraph,
    start: usize,
    absorbing: &[usize],
    solver: Solver,
) -> Result<HittingLaw> {
    let targets = check_targets(g, start, absorbing)?;
    if let Some(pos) = targets.iter().position(|&v| v == start) {
        let mut probs = vec![0.0; targets.len()];
        probs[pos] = 1.0;
        return Ok(HittingLaw {
            targets,
            probs,
            max_residual: 0.0,
        });
    }
    let system = TransientSystem::new(g, &targets);
    let start_local = system.local[start].expect("start is transient");
    let results: Vec<Result<(f64, f64)>> = match solver {
        Solver::ConjugateGradient => targets
            .par_iter()
            .map(|&t| {
                let rhs = system.rhs(g, t);
                let h = system.solve_cg(&rhs)?;
                Ok((h[start_local], system.residual_inf(&h, &rhs)))
            })
            .collect(),
        Solver::DenseLu => {
            let m = system.len();
            if m > DENSE_LU_MAX {
                return Err(Error::param(
                    "solver",
                    format!("dense LU is limited to {DENSE_LU_MAX} transient vertices, got {m}"),
                ));
            }
            let lu = system.dense_matrix().lu();
            targets
                .iter()
                .map(|&t| {
                    let rhs = system.rhs(g, t);
                    let sol = lu
                        .solve(&DVector::from_vec(rhs.clone()))
                        .ok_or(Error::SolverDiverged { iterations: 0, residual: f64::NAN })?;
                    let h = sol.as_slice().to_vec();
                    Ok((h[start_local], system.residual_inf(&h, &rhs)))
                })
                .collect()
        }
    };
    let mut probs = Vec::with_capacity(targets.len());
    let mut max_residual: f64 = 0.0;
    for r in results {
        let (p, res) = r?;
        // round-off only; exact values lie in [0, 1]
        probs.push(p.clamp(0.0, 1.0));
        max_residual = max_residual.max(res);
    }
    Ok(HittingLaw {
        targets,
        probs,
        max_residual,
    })
}

/// The walk killed on the target set. Works with the scaled system
/// `(D - A_TT) h = A_{T,t}`, which is `(I - Q) h = r` multiplied by degrees.
struct TransientSystem {
    /// global id -> local index for transient vertices
    local: Vec<Option<usize>>,
    /// local index -> global id
    global: Vec<usize>,
    degree: Vec<f64>,
    /// transient neighbours, local indices (CSR)
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl TransientSystem {
    fn new(g: &GasketGraph, targets: &[usize]) -> Self {
        let mut absorbing = vec![false; g.vertex_count()];
        for &t in targets {
            absorbing[t] = true;
        }
        let mut local = vec![None; g.vertex_count()];
        let mut global = Vec::new();
        for v in 0..g.vertex_count() {
            if !absorbing[v] {
                local[v] = Some(global.len());
                global.push(v);
            }
        }
        let mut offsets = vec![0];
        let mut neighbors = Vec::new();
        let mut degree = Vec::with_capacity(global.len());
        for &v in &global {
            degree.push(g.degree(v) as f64);
            neighbors.extend(g.neighbors(v).iter().filter_map(|&u| local[u]));
            offsets.push(neighbors.len());
        }
        Self {
            local,
            global,
            degree,
            offsets,
            neighbors,
        }
    }

    fn len(&self) -> usize {
        self.global.len()
    }

    /// Edge counts from each transient vertex into `target`.
    fn rhs(&self, g: &GasketGraph, target: usize) -> Vec<f64> {
        let mut b = vec![0.0; self.len()];
        for &u in g.neighbors(target) {
            if let Some(i) = self.local[u] {
                b[i] += 1.0;
            }
        }
        b
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            let off: f64 = self.neighbors[self.offsets[i]..self.offsets[i + 1]]
                .iter()
                .map(|&j| x[j])
                .sum();
            out[i] = self.degree[i] * x[i] - off;
        }
    }

    /// `max_i |((D - A) h - b)_i| / d_i`, the residual of `(I - Q) h = r`.
    fn residual_inf(&self, h: &[f64], b: &[f64]) -> f64 {
        let mut ah = vec![0.0; self.len()];
        self.apply(h, &mut ah);
        ah.iter()
            .zip(b)
            .zip(&self.degree)
            .map(|((a, b), d)| ((a - b) / d).abs())
            .fold(0.0, f64::max)
    }

    fn solve_cg(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.degree).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let max_iter = 50 * n + 100;
        let mut best = (f64::INFINITY, x.clone());
        for iter in 0..max_iter {
            let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r_norm < best.0 {
                best = (r_norm, x.clone());
            }
            if r_norm <= CG_RELATIVE_TOL * b_norm {
                break;
            }
            self.apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            // refresh the recursive residual now and then to stop drift
            if iter % 50 == 49 {
                self.apply(&x, &mut ap);
                for i in 0..n {
                    r[i] = b[i] - ap[i];
                }
            }
            for i in 0..n {
                z[i] = r[i] / self.degree[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let x = best.1;
        let res = self.residual_inf(&x, b);
        if res > MAX_RESIDUAL {
            return Err(Error::SolverDiverged {
                iterations: max_iter,
                residual: res,
            });
        }
        Ok(x)
    }

    fn dense_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.degree[i];
            for &j in &self.neighbors[self.offsets[i]..self.offsets[i + 1]] {
                m[(i, j)] -= 1.0;
            }
        }
        m
    }
}

/// Empirical exit law from `replicates` independent walks (one stream each).
pub fn mc_srw_hitting(
    g: &GasketGraph,
    start: usize,
    absorbing: &[usize],
    replicates: usize,
    rng: &RngStream,
) -> Result<HittingLaw> {
    let targets = check_targets(g, start, absorbing)?;
    if replicates == 0 {
        return Err(Error::param("replicates", "must be at least 1"));
    }
    let mut slot = vec![usize::MAX; g.vertex_count()];
    for (k, &t) in targets.iter().enumerate() {
        slot[t] = k;
    }
    let exits = par_replicates(rng, replicates, |r| {
        let mut v = start;
        while slot[v] == usize::MAX {
            let nb = g.neighbors(v);
            v = nb[r.gen_range(0..nb.len())];
        }
        slot[v]
    });
    let mut counts = vec![0u64; targets.len()];
    for k in exits {
        counts[k] += 1;
    }
    Ok(HittingLaw {
        targets,
        probs: counts.iter().map(|&c| c as f64 / replicates as f64).collect(),
        max_residual: 0.0,
    })
}

/// Base-2 entropy of a hitting law.
pub fn entropy_bits(law: &HittingLaw) -> f64 {
    entropy_unchecked(&law.probs)
}

/// Total variation distance between two laws over the same targets.
pub fn total_variation(a: &HittingLaw, b: &HittingLaw) -> f64 {
    0.5 * a.probs.iter().zip(&b.probs).map(|(p, q)| (p - q).abs()).sum::<f64>()
}

/// Target families scanned by [`conjecture_scan`]. The top vertex (the start)
/// is never included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SubsetSpec {
    BottomSide,
    AllBoundary,
    /// `draws` uniformly random `k`-subsets of the non-top vertices.
    RandomK { k: usize, draws: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: u32,
    pub subset: String,
    pub size: usize,
    pub entropy_bits: f64,
    pub bound: f64,
    /// `entropy_bits <= n`
    pub pass: bool,
    /// This subset has the largest entropy among those scanned at `n`.
    pub max_subset_flag: bool,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
}

impl ScanReport {
    /// Rows whose entropy exceeds the conjectured bound.
    pub fn violations(&self) -> Vec<&ScanRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    /// Generations at which the bottom side attains the scanned maximum.
    pub fn bottom_side_is_max(&self) -> Vec<(u32, bool)> {
        let mut out: Vec<(u32, bool)> = Vec::new();
        for r in self.rows.iter().filter(|r| r.subset == "bottom_side") {
            out.push((r.n, r.max_subset_flag));
        }
        out
    }

    /// CSV with header `n,subset,size,entropy_bits,bound,max_subset_flag`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "subset", "size", "entropy_bits", "bound", "max_subset_flag"])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.subset.clone(),
                r.size.to_string(),
                r.entropy_bits.to_string(),
                r.bound.to_string(),
                r.max_subset_flag.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Exact entropy of the top-started walk's exit law for each generation
/// `1..=n_max` and each subset family, compared with the bound `n`.
/// Violations are recorded in the rows, not raised as errors.
pub fn conjecture_scan(n_max: u32, subsets: &[SubsetSpec], rng: &RngStream) -> Result<ScanReport> {
    if !(1..=MAX_SCAN_GENERATION).contains(&n_max) {
        return Err(Error::param(
            "n_max",
            format!("must be in 1..={MAX_SCAN_GENERATION}, got {n_max}"),
        ));
    }
    let subset_rng = rng.derive("gasket-subsets");
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let g = build_gasket(n)?;
        let top = g.top();
        let mut named: Vec<(String, Vec<usize>)> = Vec::new();
        for spec in subsets {
            match spec {
                SubsetSpec::BottomSide => named.push(("bottom_side".into(), g.bottom_side().to_vec())),
                SubsetSpec::AllBoundary => named.push((
                    "all_boundary".into(),
                    g.boundary().into_iter().filter(|&v| v != top).collect(),
                )),
                SubsetSpec::RandomK { k, draws } => {
                    let pool: Vec<usize> = (0..g.vertex_count()).filter(|&v| v != top).collect();
                    let k = (*k).clamp(1, pool.len());
                    for d in 0..*draws {
                        let mut r = subset_rng.child(u64::from(n) << 32 | d as u64).rng();
                        let mut pick: Vec<usize> =
                            sample_indices(&mut r, pool.len(), k).into_iter().map(|i| pool[i]).collect();
                        pick.sort_unstable();
                        named.push((format!("random_k{k}_{d}"), pick));
                    }
                }
            }
        }
        let first = rows.len();
        for (name, set) in named {
            let law = hitting_distribution(&g, top, &set)?;
            let h = entropy_bits(&law);
            rows.push(ScanRow {
                n,
                subset: name,
                size: set.len(),
                entropy_bits: h,
                bound: f64::from(n),
                pass: h <= f64::from(n) + 1e-12,
                max_subset_flag: false,
                max_residual: law.max_residual,
            });
        }
        let best = rows[first..].iter().map(|r| r.entropy_bits).fold(f64::NEG_INFINITY, f64::max);
        for r in &mut rows[first..] {
            r.max_subset_flag = r.entropy_bits >= best - 1e-12;
        }
    }
    Ok(ScanReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct enumeration of generation-3 vertices: corners and edge midpoints
    /// of all 27 smallest triangles, deduplicated.
    fn brute_force_vertex_count(n: u32) -> usize {
        let side = 1i64 << (n - 1);
        let mut tris = vec![(0i64, 0i64, side)];
        while tris[0].2 > 1 {
            tris = tris
                .into_iter()
                .flat_map(|(a, b, s)| {
                    let h = s / 2;
                    [(a, b, h), (a + h, b, h), (a, b + h, h)]
                })
                .collect();
        }
        let pts: BTreeSet<(i64, i64)> = tris
            .iter()
            .flat_map(|&(a, b, s)| [(a, b), (a + s, b), (a, b + s)])
            .collect();
        pts.len()
    }

    #[test]
    fn small_generations() {
        let g = build_gasket(1).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.bottom_side().len(), 2);
        assert_eq!(build_gasket(2).unwrap().vertex_count(), 6);
        assert_eq!(build_gasket(3).unwrap().vertex_count(), 15);
        assert_eq!(brute_force_vertex_count(3), 15);
        assert_eq!(expected_vertex_count(3), 15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(build_gasket(0).is_err());
        assert!(build_gasket(13).is_err());
    }

    #[test]
    fn structure_matches_closed_forms() {
        for n in 1..=8 {
            let g = build_gasket(n).unwrap();
            assert_eq!(g.vertex_count(), expected_vertex_count(n));
            assert_eq!(g.vertex_count(), brute_force_vertex_count(n));
            assert_eq!(g.bottom_side().len(), expected_side_size(n));
            let mut degrees: Vec<usize> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
            degrees.sort_unstable();
            assert_eq!(&degrees[..3], &[2, 2, 2]);
            assert!(degrees[3..].iter().all(|&d| d == 4));
            assert!(g.is_connected());
            assert_eq!(g.role(g.top()), VertexRole::Top);
        }
    }

    #[test]
    fn vertex_order_is_lexicographic() {
        let g = build_gasket(4).unwrap();
        assert!(g.coords().windows(2).all(|w| (w[0][0], w[0][1]) < (w[1][0], w[1][1])));
        let xs: Vec<f64> = g.bottom_side().iter().map(|&v| g.coords()[v][0]).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn first_generation_is_fair() {
        let g = build_gasket(1).unwrap();
        let law = hitting_distribution(&g, g.top(), g.bottom_side()).unwrap();
        assert_eq!(law.probs, vec![0.5, 0.5]);
        assert_eq!(entropy_bits(&law), 1.0);
    }

    #[test]
    fn second_generation_hand_solution() {
        // transient vertices A (left mid), C (right mid), T (top):
        // x = (1 + y + z) / 4, y = (x + z) / 4, z = (x + y) / 2
        // gives x = 7/20, y = 3/20, z = 1/4
        let g = build_gasket(2).unwrap();
        let law = hitting_distribution(&g, g.top(), g.bottom_side()).unwrap();
        let expected = [0.25, 0.5, 0.25];
        for (p, e) in law.probs.iter().zip(expected) {
            assert!((p - e).abs() < 1e-14, "{:?}", law.probs);
        }
        assert!((entropy_bits(&law) - 1.5).abs() < 1e-13);
    }

    #[test]
    fn start_in_target_set_is_point_mass() {
        let g = build_gasket(3).unwrap();
        let b = g.bottom_side().to_vec();
        let law = hitting_distribution(&g, b[2], &b).unwrap();
        assert_eq!(law.probs[2], 1.0);
        assert_eq!(law.total(), 1.0);
    }

    #[test]
    fn empty_target_set_rejected() {
        let g = build_gasket(2).unwrap();
        assert_eq!(hitting_distribution(&g, 0, &[]).unwrap_err(), Error::Empty("absorbing set"));
        assert!(hitting_distribution(&g, 99, &[0]).is_err());
    }

    #[test]
    fn cg_matches_dense_lu() {
        for n in 1..=4 {
            let g = build_gasket(n).unwrap();
            let set = g.boundary().into_iter().filter(|&v| v != g.top()).collect::<Vec<_>>();
            let cg = hitting_distribution(&g, g.top(), &set).unwrap();
            let lu = hitting_distribution_with(&g, g.top(), &set, Solver::DenseLu).unwrap();
            for (a, b) in cg.probs.iter().zip(&lu.probs) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(lu.max_residual < 1e-12);
        }
    }

    #[test]
    fn laws_are_normalised_and_symmetric() {
        for n in 1..=7 {
            let g = build_gasket(n).unwrap();
            let law = hitting_distribution(&g, g.top(), g.bottom_side()).unwrap();
            assert!((law.total() - 1.0).abs() < 1e-12, "n={n} total={}", law.total());
            assert!(law.probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
            assert!(law.max_residual < 1e-10);
            let rev: Vec<f64> = law.probs.iter().rev().copied().collect();
            for (a, b) in law.probs.iter().zip(&rev) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!(entropy_bits(&law) <= (expected_side_size(n) as f64).log2() + 1e-12);
        }
    }

    #[test]
    fn monte_carlo_first_generation() {
        let g = build_gasket(1).unwrap();
        let law = mc_srw_hitting(&g, g.top(), g.bottom_side(), 100_000, &RngStream::new(1, 0)).unwrap();
        let se = (0.25f64 / 100_000.0).sqrt();
        for p in law.probs {
            assert!((p - 0.5).abs() < 4.0 * se);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let g = build_gasket(3).unwrap();
        let a = mc_srw_hitting(&g, g.top(), g.bottom_side(), 5_000, &RngStream::new(2, 0)).unwrap();
        let b = mc_srw_hitting(&g, g.top(), g.bottom_side(), 5_000, &RngStream::new(2, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mirror_maps_bottom_side_onto_itself() {
        let g = build_gasket(3).unwrap();
        let b = g.bottom_side();
        for (i, &v) in b.iter().enumerate() {
            assert_eq!(g.mirror(v), b[b.len() - 1 - i]);
        }
    }

    #[test]
    fn scan_first_generation() {
        let rep = conjecture_scan(3, &[SubsetSpec::BottomSide, SubsetSpec::AllBoundary], &RngStream::new(1, 0)).unwrap();
        let first = &rep.rows[0];
        assert_eq!((first.n, first.subset.as_str()), (1, "bottom_side"));
        assert_eq!(first.entropy_bits, 1.0);
        assert!(first.pass);
        assert!(conjecture_scan(10, &[SubsetSpec::BottomSide], &RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn scan_random_subsets_are_reproducible() {
        let spec = [SubsetSpec::RandomK { k: 4, draws: 3 }];
        let a = conjecture_scan(3, &spec, &RngStream::new(5, 0)).unwrap();
        let b = conjecture_scan(3, &spec, &RngStream::new(5, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 9);
    }

    #[test]
    fn csv_exports() {
        let g = build_gasket(2).unwrap();
        let mut e = Vec::new();
        g.write_edges_csv(&mut e).unwrap();
        assert_eq!(String::from_utf8(e).unwrap().lines().count(), 1 + 9);
        let mut v = Vec::new();
        g.write_vertices_csv(&mut v).unwrap();
        let text = String::from_utf8(v).unwrap();
        assert!(text.starts_with("id,x,y,role\n"));
        assert_eq!(text.matches(",top").count(), 1);
    }
}
