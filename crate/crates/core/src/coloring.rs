//! Vector colorings: upper bounds on `χ_vec` by low-rank unit-vector descent,
//! the adjacency-spectrum lower bound, hyperplane rounding, and the strict
//! (equality-constrained) variant.
//!
//! A vector coloring assigns unit vectors to vertices; its value is
//! `κ = 1 - 1/t` where `t < 0` is the largest inner product over edges, and
//! `χ_vec(G)` is the least such `κ` (never below 2).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::BufRead;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::GeometricGraph;
use crate::error::{input, Error, Result};
use crate::graph::{CutResult, Graph};
use crate::partition::{check_rows, parse_field, read_vectors, write_vector};
use crate::rng::{substream, unit_vector, Stream};
use crate::sphere::{clamped_acos, dot, norm, UNIT_TOLERANCE};

/// Slack allowed when re-verifying `max_edge_dot <= -1/(κ - 1)`.
pub const FEASIBILITY_SLACK: f64 = 1e-8;
/// Strict colorings must have all edge inner products within this spread.
pub const STRICT_SPREAD: f64 = 1e-6;

/// One unit vector per vertex, all in `R^r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    r: usize,
    vectors: Vec<Vec<f64>>,
    max_edge_dot: f64,
}

impl Embedding {
    /// Validates unit norms and caches the largest inner product over edges
    /// of `g` (`-inf` for an edgeless graph).
    pub fn new(vectors: Vec<Vec<f64>>, g: &Graph) -> Result<Self> {
        if vectors.len() != g.n() {
            return input(format!(
                "embedding has {} vectors for {} vertices",
                vectors.len(),
                g.n()
            ));
        }
        let r = vectors.first().map_or(0, Vec::len);
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != r {
                return input(format!("vector {i} has dimension {}, expected {r}", v.len()));
            }
            if (norm(v) - 1.0).abs() > UNIT_TOLERANCE {
                return input(format!("vector {i} is not a unit vector"));
            }
        }
        let max_edge_dot = edge_dots(&vectors, g).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            r,
            vectors,
            max_edge_dot,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn max_edge_dot(&self) -> f64 {
        self.max_edge_dot
    }

    /// `κ = 1 - 1/max_edge_dot`, floored at 2; `None` unless the largest edge
    /// inner product is negative.
    pub fn kappa(&self) -> Option<f64> {
        kappa_from_dot(self.max_edge_dot)
    }

    /// Applies the orthogonal matrix `q` (`r × r`, row-major) to every vector.
    pub fn rotated(&self, q: &[f64], g: &Graph) -> Result<Self> {
        if q.len() != self.r * self.r {
            return input("rotation has the wrong shape");
        }
        let vectors = self
            .vectors
            .iter()
            .map(|v| {
                (0..self.r)
                    .map(|i| dot(&q[i * self.r..(i + 1) * self.r], v))
                    .collect()
            })
            .collect();
        Self::new(vectors, g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.vectors.len(), self.r).unwrap();
        for v in &self.vectors {
            write_vector(&mut out, v);
        }
        out
    }

    /// Reads the `n r` + vectors format and re-validates against `g`.
    pub fn read(reader: impl BufRead, g: &Graph) -> Result<Self> {
        let (header, rows) = read_vectors(reader, 2)?;
        let n: usize = parse_field(&header.1[0], header.0)?;
        let r: usize = parse_field(&header.1[1], header.0)?;
        let vectors = check_rows(rows, n, r)?;
        Self::new(vectors, g)
    }
}

fn edge_dots<'a>(vectors: &'a [Vec<f64>], g: &'a Graph) -> impl Iterator<Item = f64> + 'a {
    g.edges()
        .iter()
        .map(move |&(u, v)| dot(&vectors[u], &vectors[v]))
}

fn kappa_from_dot(t: f64) -> Option<f64> {
    (t < 0.0).then(|| (1.0 - 1.0 / t).max(2.0))
}

/// Settings for the smoothed-maximum descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Initial inverse temperature of the soft maximum.
    pub beta_start: f64,
    pub beta_end: f64,
    pub beta_growth: f64,
    /// Descent iterations per temperature.
    pub iterations_per_stage: usize,
    /// Stop a stage once the Riemannian gradient norm falls below this.
    pub gradient_tolerance: f64,
    pub restarts: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            beta_start: 4.0,
            beta_end: 2e5,
            beta_growth: 2.0,
            iterations_per_stage: 400,
            gradient_tolerance: 1e-11,
            restarts: 5,
        }
    }
}

/// Largest rank chosen by [`default_rank`] from the edge count alone.
pub const RANK_CAP: usize = 64;

/// Default embedding rank: `⌈√(2n)⌉ + 1`, raised towards `⌈√(2(n + m))⌉`
/// (enough for an optimal face counting edge constraints, capped at
/// [`RANK_CAP`]), never above `n` or below 2.
pub fn default_rank(g: &Graph) -> usize {
    let n = g.n();
    let base = ((2 * n) as f64).sqrt().ceil() as usize + 1;
    let with_edges = ((2 * (n + g.m())) as f64).sqrt().ceil() as usize;
    base.max(with_edges.min(RANK_CAP)).min(n).max(2)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorColoringResult {
    /// Feasible vector chromatic value; only meaningful when `converged`.
    pub kappa_upper: f64,
    pub embedding: Embedding,
    pub kappa_spectral_lower: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Restart that produced the embedding.
    pub restart: usize,
}

impl VectorColoringResult {
    /// Re-checks the witness from its raw vectors.
    pub fn verify(&self, g: &Graph) -> bool {
        if !self.converged {
            return false;
        }
        let bound = -1.0 / (self.kappa_upper - 1.0) + FEASIBILITY_SLACK;
        edge_dots(self.embedding.vectors(), g).all(|t| t <= bound)
    }
}

/// Rows of a flat `n × r` matrix kept on the unit sphere, optionally followed
/// by free Euclidean coordinates.
struct Manifold {
    n: usize,
    r: usize,
}

impl Manifold {
    fn project(&self, x: &[f64], grad: &mut [f64]) {
        for i in 0..self.n {
            let row = i * self.r..(i + 1) * self.r;
            let radial = dot(&grad[row.clone()], &x[row.clone()]);
            for k in row {
                grad[k] -= radial * x[k];
            }
        }
    }

    fn retract(&self, x: &[f64], dir: &[f64], step: f64, out: &mut [f64]) {
        for (o, (a, b)) in out.iter_mut().zip(x.iter().zip(dir)) {
            *o = a - step * b;
        }
        for i in 0..self.n {
            let row = &mut out[i * self.r..(i + 1) * self.r];
            let nr = norm(row);
            row.iter_mut().for_each(|v| *v /= nr);
        }
    }

    /// Armijo-backtracking Riemannian gradient descent. Returns iterations used.
    fn descend<F>(&self, x: &mut Vec<f64>, mut objective: F, max_iters: usize, tol: f64) -> usize
    where
        F: FnMut(&[f64], &mut [f64]) -> f64,
    {
        let mut grad = vec![0.0; x.len()];
        let mut trial = vec![0.0; x.len()];
        let mut trial_grad = vec![0.0; x.len()];
        let mut value = objective(x, &mut grad);
        self.project(x, &mut grad);
        let mut step = 1.0;
        for iter in 0..max_iters {
            let g2 = dot(&grad, &grad);
            if g2.sqrt() < tol {
                return iter;
            }
            let mut accepted = false;
            for _ in 0..60 {
                self.retract(x, &grad, step, &mut trial);
                let v = objective(&trial, &mut trial_grad);
                if v <= value - 1e-4 * step * g2 {
                    value = v;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return iter;
            }
            std::mem::swap(x, &mut trial);
            std::mem::swap(&mut grad, &mut trial_grad);
            self.project(x, &mut grad);
            step *= 2.0;
        }
        max_iters
    }
}

/// Soft maximum of edge inner products and its gradient.
fn soft_max(x: &[f64], r: usize, edges: &[(usize, usize)], beta: f64, grad: &mut [f64]) -> f64 {
    let row = |i: usize| &x[i * r..(i + 1) * r];
    let dots: Vec<f64> = edges.iter().map(|&(u, v)| dot(row(u), row(v))).collect();
    let top = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = dots.iter().map(|s| (beta * (s - top)).exp()).collect();
    let total: f64 = weights.iter().sum();
    grad.iter_mut().for_each(|g| *g = 0.0);
    for (&(u, v), w) in edges.iter().zip(&weights) {
        let p = w / total;
        for k in 0..r {
            grad[u * r + k] += p * x[v * r + k];
            grad[v * r + k] += p * x[u * r + k];
        }
    }
    top + total.ln() / beta
}

fn random_start(n: usize, r: usize, seed: u64, restart: usize) -> Vec<f64> {
    let mut rng = substream(seed, Stream::Solve, restart as u64);
    (0..n).flat_map(|_| unit_vector(&mut rng, r)).collect()
}

fn hard_max(x: &[f64], r: usize, edges: &[(usize, usize)]) -> f64 {
    edges
        .iter()
        .map(|&(u, v)| dot(&x[u * r..(u + 1) * r], &x[v * r..(v + 1) * r]))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn to_rows(x: &[f64], n: usize, r: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| x[i * r..(i + 1) * r].to_vec()).collect()
}

fn check_solver_input(g: &Graph, rank: usize) -> Result<()> {
    if g.m() == 0 {
        return input("vector coloring needs at least one edge");
    }
    if rank < 2 {
        return input(format!("rank {rank} must be at least 2"));
    }
    Ok(())
}

fn run_soft_max(g: &Graph, r: usize, mut x: Vec<f64>, schedule: &Schedule) -> (Vec<f64>, usize) {
    let manifold = Manifold { n: g.n(), r };
    let edges = g.edges();
    let mut beta = schedule.beta_start;
    let mut iterations = 0;
    loop {
        iterations += manifold.descend(
            &mut x,
            |p, grad| soft_max(p, r, edges, beta, grad),
            schedule.iterations_per_stage,
            schedule.gradient_tolerance,
        );
        if beta >= schedule.beta_end {
            break;
        }
        beta = (beta * schedule.beta_growth).min(schedule.beta_end);
    }
    (x, iterations)
}

/// Upper bound on `χ_vec(g)` from the best of `schedule.restarts` seeded
/// descents in rank `rank`.
pub fn chi_vec_upper(
    g: &Graph,
    rank: usize,
    seed: u64,
    schedule: &Schedule,
) -> Result<VectorColoringResult> {
    chi_vec_upper_with_starts(g, rank, seed, schedule, &[])
}

/// As [`chi_vec_upper`], with additional warm starts tried after the seeded
/// restarts. Warm starts narrower than `rank` are zero-padded.
pub fn chi_vec_upper_with_starts(
    g: &Graph,
    rank: usize,
    seed: u64,
    schedule: &Schedule,
    warm: &[&Embedding],
) -> Result<VectorColoringResult> {
    check_solver_input(g, rank)?;
    let n = g.n();
    let mut starts: Vec<Vec<f64>> = (0..schedule.restarts.max(1))
        .map(|k| random_start(n, rank, seed, k))
        .collect();
    for e in warm {
        if e.vectors().len() != n || e.r() > rank {
            return input("warm start does not fit the graph or rank");
        }
        starts.push(
            e.vectors()
                .iter()
                .flat_map(|v| v.iter().copied().chain(std::iter::repeat(0.0)).take(rank))
                .collect(),
        );
    }
    let runs: Vec<(Vec<f64>, usize, f64)> = starts
        .into_par_iter()
        .map(|x0| {
            let (x, it) = run_soft_max(g, rank, x0, schedule);
            let t = hard_max(&x, rank, g.edges());
            (x, it, t)
        })
        .collect();
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.2 < runs[best].2 {
            best = k;
        }
    }
    let iterations = runs.iter().map(|r| r.1).sum();
    let (x, _, t) = &runs[best];
    let embedding = Embedding::new(to_rows(x, n, rank), g)?;
    let kappa = kappa_from_dot(*t);
    Ok(VectorColoringResult {
        kappa_upper: kappa.unwrap_or(f64::INFINITY),
        embedding,
        kappa_spectral_lower: chi_vec_spectral_lower(g)?,
        iterations,
        converged: kappa.is_some(),
        restart: best,
    })
}

/// Eigenvalue certificate `1 + λ_max / |λ_min|` of the adjacency matrix, a
/// lower bound on `χ_vec`.
pub fn chi_vec_spectral_lower(g: &Graph) -> Result<f64> {
    if g.m() == 0 {
        return input("spectral bound needs at least one edge");
    }
    let n = g.n();
    let a = DMatrix::from_row_slice(n, n, &g.adjacency_matrix());
    let eig = SymmetricEigen::new(a);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    Ok(1.0 + max / min.abs())
}

/// The construction's own points as a vector coloring: `κ = 1 - 1/cos θ`.
/// Fails if some edge has inner product above `cos θ`.
pub fn identity_embedding_kappa(gg: &GeometricGraph) -> Result<f64> {
    let theta = gg.theta;
    if !(theta > std::f64::consts::FRAC_PI_2 && theta < PI) {
        return input(format!("theta = {theta} must lie strictly between π/2 and π"));
    }
    let c = theta.cos();
    if let Some(&(u, v)) = gg
        .graph
        .edges()
        .iter()
        .find(|&&(u, v)| dot(&gg.points[u], &gg.points[v]) > c)
    {
        return Err(Error::Corruption(format!(
            "edge ({u}, {v}) has inner product above cos θ"
        )));
    }
    Ok(1.0 - 1.0 / c)
}

pub fn identity_embedding(gg: &GeometricGraph) -> Result<Embedding> {
    Embedding::new(gg.points.clone(), &gg.graph)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundingSummary {
    pub trials: usize,
    pub mean: f64,
    /// Standard error of the mean cut over trials.
    pub stderr: f64,
    pub max: usize,
    pub best: CutResult,
}

/// Cuts by the sign of `⟨x_i, z⟩` for uniform random normals `z`; a zero
/// inner product goes to the positive side. Trial `k` uses rounding
/// substream `k` of `seed`.
pub fn hyperplane_round(e: &Embedding, g: &Graph, trials: usize, seed: u64) -> Result<RoundingSummary> {
    if trials == 0 {
        return input("trials must be at least 1");
    }
    if e.vectors().len() != g.n() {
        return input("embedding does not cover every vertex");
    }
    let r = e.r();
    let values: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let side = hyperplane_side(e, r, seed, k);
            g.cut_value_of(&side)
        })
        .collect();
    let mean = values.iter().sum::<usize>() as f64 / trials as f64;
    let var = if trials > 1 {
        values
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / (trials - 1) as f64
    } else {
        0.0
    };
    let mut best_k = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best_k] {
            best_k = k;
        }
    }
    let side = hyperplane_side(e, r, seed, best_k);
    Ok(RoundingSummary {
        trials,
        mean,
        stderr: (var / trials as f64).sqrt(),
        max: values[best_k],
        best: CutResult {
            value: values[best_k],
            side,
            exact: false,
        },
    })
}

fn hyperplane_side(e: &Embedding, r: usize, seed: u64, trial: usize) -> Vec<bool> {
    let mut rng = substream(seed, Stream::Rounding, trial as u64);
    let normal: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
    e.vectors().iter().map(|v| dot(v, &normal) >= 0.0).collect()
}

/// `Σ_{ij ∈ E} arccos⟨x_i, x_j⟩ / π`, the expected hyperplane cut.
pub fn expected_hyperplane_cut(e: &Embedding, g: &Graph) -> f64 {
    edge_dots(e.vectors(), g).map(|t| clamped_acos(t) / PI).sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrictColoringResult {
    /// `1 - 1/max edge dot`; usable only when `converged`.
    pub kappa: f64,
    pub embedding: Embedding,
    /// Largest minus smallest edge inner product.
    pub spread: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Settings for the equality-constrained (strict) variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrictSchedule {
    pub penalty_start: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub restarts: usize,
}

impl Default for StrictSchedule {
    fn default() -> Self {
        Self {
            penalty_start: 10.0,
            penalty_growth: 2.0,
            penalty_max: 1e5,
            outer_iterations: 80,
            inner_iterations: 500,
            restarts: 5,
        }
    }
}

/// Augmented-Lagrangian objective over unit rows and the common edge target
/// `t` (the last coordinate).
fn strict_lagrangian(
    x: &[f64],
    r: usize,
    edges: &[(usize, usize)],
    multipliers: &[f64],
    penalty: f64,
    grad: &mut [f64],
) -> f64 {
    let t = *x.last().unwrap();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let tail = grad.len() - 1;
    let mut value = t;
    grad[tail] = 1.0;
    for (&(u, v), &lambda) in edges.iter().zip(multipliers) {
        let s = dot(&x[u * r..(u + 1) * r], &x[v * r..(v + 1) * r]);
        let gap = s - t;
        value += lambda * gap + 0.5 * penalty * gap * gap;
        let w = lambda + penalty * gap;
        for k in 0..r {
            grad[u * r + k] += w * x[v * r + k];
            grad[v * r + k] += w * x[u * r + k];
        }
        grad[tail] -= w;
    }
    value
}

/// Strict vector chromatic number upper bound (`ϑ` of the complement):
/// minimize `κ` with every edge inner product equal to `-1/(κ - 1)`.
/// The equality is enforced by an augmented Lagrangian with the common
/// target as a free variable.
pub fn theta_complement_upper(
    g: &Graph,
    rank: usize,
    seed: u64,
    schedule: &StrictSchedule,
) -> Result<StrictColoringResult> {
    check_solver_input(g, rank)?;
    let n = g.n();
    let edges = g.edges();
    let m = edges.len();
    let manifold = Manifold { n, r: rank };
    let runs: Vec<(Vec<f64>, usize, f64, f64)> = (0..schedule.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut x = random_start(n, rank, seed ^ 0x5eed, k);
            x.push(hard_max(&x, rank, edges).min(0.0));
            let mut multipliers = vec![1.0 / m as f64; m];
            let mut penalty = schedule.penalty_start;
            let mut iterations = 0;
            let mut last_residual = f64::INFINITY;
            for _ in 0..schedule.outer_iterations {
                iterations += manifold.descend(
                    &mut x,
                    |p, grad| strict_lagrangian(p, rank, edges, &multipliers, penalty, grad),
                    schedule.inner_iterations,
                    1e-10,
                );
                let t = *x.last().unwrap();
                let mut residual: f64 = 0.0;
                for (lambda, &(u, v)) in multipliers.iter_mut().zip(edges) {
                    let gap = dot(&x[u * rank..(u + 1) * rank], &x[v * rank..(v + 1) * rank]) - t;
                    *lambda += penalty * gap;
                    residual = residual.max(gap.abs());
                }
                if residual < 0.1 * STRICT_SPREAD {
                    break;
                }
                if residual > 0.25 * last_residual {
                    penalty = (penalty * schedule.penalty_growth).min(schedule.penalty_max);
                }
                last_residual = residual;
            }
            x.pop();
            let dots: Vec<f64> = edges
                .iter()
                .map(|&(u, v)| dot(&x[u * rank..(u + 1) * rank], &x[v * rank..(v + 1) * rank]))
                .collect();
            let hi = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = dots.iter().copied().fold(f64::INFINITY, f64::min);
            (x, iterations, hi, hi - lo)
        })
        .collect();
    let usable = |run: &(Vec<f64>, usize, f64, f64)| run.3 <= STRICT_SPREAD && run.2 < 0.0;
    let mut best: Option<usize> = None;
    for (k, run) in runs.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => match (usable(run), usable(&runs[b])) {
                (true, false) => true,
                (false, true) => false,
                _ => run.2 < runs[b].2,
            },
        };
        if better {
            best = Some(k);
        }
    }
    let (x, _, hi, spread) = &runs[best.unwrap()];
    let converged = usable(&runs[best.unwrap()]);
    Ok(StrictColoringResult {
        kappa: kappa_from_dot(*hi).unwrap_or(f64::INFINITY),
        embedding: Embedding::new(to_rows(x, n, rank), g)?,
        spread: *spread,
        iterations: runs.iter().map(|r| r.1).sum(),
        converged,
    })
}
