//! Threshold graphs on the sphere and the discrete construction `G(θ, ε)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::graph::Graph;
use crate::partition::{partition_sphere, PartitionLimits, PointSet};
use crate::sphere::{
    choose_dimension, choose_gamma, dimension_condition, dot, gamma_cap, gamma_condition, norm,
    UNIT_TOLERANCE,
};

/// Largest point set turned into a threshold graph (pairwise work is quadratic).
pub const MAX_THRESHOLD_VERTICES: usize = 60_000;

/// Parameters of one realized construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub theta: f64,
    pub epsilon: f64,
    pub d: usize,
    pub gamma: f64,
    pub n_cells: usize,
    /// `d` satisfies the cap-ratio condition for `(θ, ε)`.
    pub dimension_certified: bool,
    /// `gamma` satisfies the cap-ratio condition and the `ε/(d|cot θ|)` cap.
    pub gamma_certified: bool,
    pub certified_diameter: f64,
    pub volume_tolerance: f64,
    pub realized_constant: f64,
}

impl ConstructionParams {
    /// Both parameter conditions hold, so the MaxCut lemma applies as stated.
    pub fn certified(&self) -> bool {
        self.dimension_certified && self.gamma_certified
    }
}

/// Optional replacements for the automatically chosen `d` and `gamma`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub d: Option<usize>,
    pub gamma: Option<f64>,
    pub limits: Option<PartitionLimits>,
}

/// A threshold graph together with the unit vectors that define it.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    pub graph: Graph,
    pub points: Vec<Vec<f64>>,
    pub theta: f64,
    pub params: Option<ConstructionParams>,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > FRAC_PI_2 && theta < PI) {
        return input(format!("theta = {theta} must lie strictly between π/2 and π"));
    }
    Ok(())
}

/// Joins two points when their angle is at least `theta`, i.e. when
/// `x·y <= cos θ` (closed condition).
pub fn build_threshold_graph(points: Vec<Vec<f64>>, theta: f64) -> Result<GeometricGraph> {
    check_theta(theta)?;
    if points.len() < 2 {
        return input("threshold graph needs at least two points");
    }
    if points.len() > MAX_THRESHOLD_VERTICES {
        return Err(Error::Size {
            what: "threshold graph vertex count",
            actual: points.len(),
            limit: MAX_THRESHOLD_VERTICES,
        });
    }
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return input(format!("point {i} has dimension {}, expected {dim}", p.len()));
        }
        if (norm(p) - 1.0).abs() > UNIT_TOLERANCE {
            return input(format!("point {i} is not a unit vector"));
        }
    }
    let threshold = theta.cos();
    let edges: Vec<(usize, usize)> = (0..points.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let points = &points;
            (i + 1..points.len())
                .filter(move |&j| dot(&points[i], &points[j]) <= threshold)
                .map(move |j| (i, j))
        })
        .collect();
    let graph = Graph::from_edges(points.len(), edges)?;
    Ok(GeometricGraph {
        graph,
        points,
        theta,
        params: None,
    })
}

/// Builds `G(θ, ε)`: choose `d`, choose `gamma`, partition the sphere, use
/// the cell centers as vertices, and join pairs at angle at least `θ`.
pub fn build_construction(theta: f64, epsilon: f64, overrides: Overrides) -> Result<GeometricGraph> {
    check_theta(theta)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return input(format!("epsilon = {epsilon} must lie strictly between 0 and 1"));
    }
    let d = match overrides.d {
        Some(d) if d < 2 => return input(format!("dimension d = {d} must be at least 2")),
        Some(d) => d,
        None => choose_dimension(theta, epsilon)?,
    };
    let gamma = match overrides.gamma {
        Some(g) => g,
        None => choose_gamma(theta, epsilon, d)?,
    };
    let partition = partition_sphere(d, gamma, overrides.limits.unwrap_or_default())?;
    let params = ConstructionParams {
        theta,
        epsilon,
        d,
        gamma,
        n_cells: partition.n(),
        dimension_certified: dimension_condition(d, theta, epsilon)?,
        gamma_certified: gamma <= gamma_cap(theta, epsilon, d)
            && gamma_condition(theta, epsilon, d, gamma)?,
        certified_diameter: partition.certified_diameter(),
        volume_tolerance: partition.volume_tolerance(),
        realized_constant: partition.realized_constant(),
    };
    let mut gg = build_threshold_graph(partition.representatives().to_vec(), theta)?;
    gg.params = Some(params);
    Ok(gg)
}

impl GeometricGraph {
    /// Recomputes every pair's inner product and checks it against the edge
    /// set. A pair within `tolerance` of the threshold is accepted either way.
    pub fn revalidate(&self, tolerance: f64) -> Result<()> {
        let threshold = self.theta.cos();
        let n = self.points.len();
        let bad = (0..n).into_par_iter().find_map_first(|i| {
            (i + 1..n).find_map(|j| {
                let c = dot(&self.points[i], &self.points[j]);
                let edge = self.graph.has_edge(i, j);
                let ok = if edge {
                    c <= threshold + tolerance
                } else {
                    c > threshold - tolerance
                };
                (!ok).then_some((i, j, c, edge))
            })
        });
        match bad {
            None => Ok(()),
            Some((i, j, c, edge)) => Err(Error::Corruption(format!(
                "pair ({i}, {j}) has inner product {c} but edge = {edge} at cos θ = {threshold}"
            ))),
        }
    }

    /// Largest inner product over edges (at most `cos θ` by construction).
    pub fn max_edge_dot(&self) -> f64 {
        self.graph
            .edges()
            .iter()
            .map(|&(u, v)| dot(&self.points[u], &self.points[v]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn points_file(&self) -> PointSet {
        PointSet {
            d: self.points[0].len(),
            gamma: self.params.as_ref().map_or(0.0, |p| p.gamma),
            points: self.points.clone(),
        }
    }

    /// Fraction of vertex pairs whose representative angle lies within
    /// `2·gamma` of `θ`, relative to the edge count. Every cell pair that
    /// straddles the threshold is among these.
    pub fn straddling_fraction(&self) -> Option<f64> {
        let params = self.params.as_ref()?;
        let spread = 2.0 * params.certified_diameter;
        let (lo, hi) = ((self.theta - spread).max(0.0), (self.theta + spread).min(PI));
        let (c_hi, c_lo) = (lo.cos(), hi.cos());
        let n = self.points.len();
        let count: usize = (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .filter(|&j| {
                        let c = dot(&self.points[i], &self.points[j]);
                        c >= c_lo && c <= c_hi
                    })
                    .count()
            })
            .sum();
        Some(count as f64 / self.graph.m().max(1) as f64)
    }
}
