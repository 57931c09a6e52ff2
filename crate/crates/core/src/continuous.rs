//! Monte Carlo machinery for the continuous threshold graph on `S^{d-1}`:
//! every point is a vertex and two points are adjacent when their angle is at
//! least `θ`. Edge sets are sampled as uniform pairs, and the cut measure of a
//! set `A` is estimated as the fraction of sampled edges it separates.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::partition::CellPartition;
use crate::rng::{substream, unit_vector, Stream};
use crate::sphere::{cap_radius_for_measure, clamped_acos, dot, norm, UNIT_TOLERANCE};

/// Pairs drawn from one substream; fixes the work split independently of
/// the thread count.
pub const SAMPLE_CHUNK: usize = 4096;
/// Largest pair count accepted by [`sample_continuous_pairs`].
pub const MAX_PAIRS: usize = 100_000_000;
/// Default pair count for continuous estimates.
pub const DEFAULT_PAIRS: usize = 1_000_000;

/// Uniform pairs on `S^{d-1}`, keeping those at angle at least `theta`.
#[derive(Debug, Clone)]
pub struct EdgeAngleSample {
    d: usize,
    theta: f64,
    seed: u64,
    pair_count: usize,
    /// Retained pairs, `2d` coordinates each (first point then second).
    coords: Vec<f64>,
    angles: Vec<f64>,
}

/// An estimated proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    fn proportion(hits: usize, total: usize) -> Self {
        let p = hits as f64 / total as f64;
        Self {
            value: p,
            stderr: (p * (1.0 - p) / total as f64).sqrt(),
        }
    }

    fn mean_of(values: impl Iterator<Item = f64> + Clone, count: usize) -> Self {
        let k = count as f64;
        let mean = values.clone().sum::<f64>() / k;
        let var = if count > 1 {
            values.map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            stderr: (var / k).sqrt(),
        }
    }
}

/// Draws `pair_count` uniform pairs on `S^{d-1}` and retains those at angle
/// at least `theta` (`theta = 0` keeps everything).
pub fn sample_continuous_pairs(d: usize, theta: f64, pair_count: usize, seed: u64) -> Result<EdgeAngleSample> {
    if d < 2 {
        return input(format!("dimension d = {d} must be at least 2"));
    }
    if !(0.0..=PI).contains(&theta) {
        return input(format!("theta = {theta} must lie in [0, π]"));
    }
    if pair_count == 0 {
        return input("pair count must be at least 1");
    }
    if pair_count > MAX_PAIRS {
        return Err(Error::Size {
            what: "sampled pair count",
            actual: pair_count,
            limit: MAX_PAIRS,
        });
    }
    let chunks = pair_count.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, Stream::Sampling, c as u64);
            let size = SAMPLE_CHUNK.min(pair_count - c * SAMPLE_CHUNK);
            let mut coords = Vec::new();
            let mut angles = Vec::new();
            for _ in 0..size {
                let x = unit_vector(&mut rng, d);
                let y = unit_vector(&mut rng, d);
                let a = clamped_acos(dot(&x, &y));
                if a >= theta {
                    coords.extend_from_slice(&x);
                    coords.extend_from_slice(&y);
                    angles.push(a);
                }
            }
            (coords, angles)
        })
        .collect();
    let mut coords = Vec::new();
    let mut angles = Vec::new();
    for (c, a) in parts {
        coords.extend(c);
        angles.extend(a);
    }
    Ok(EdgeAngleSample {
        d,
        theta,
        seed,
        pair_count,
        coords,
        angles,
    })
}

impl EdgeAngleSample {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn retained(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Retained pair `i` as `(x, y)`.
    pub fn pair(&self, i: usize) -> (&[f64], &[f64]) {
        let base = 2 * self.d * i;
        (
            &self.coords[base..base + self.d],
            &self.coords[base + self.d..base + 2 * self.d],
        )
    }

    fn par_pairs(&self) -> impl IndexedParallelIterator<Item = (&[f64], &[f64])> + '_ {
        self.coords
            .par_chunks_exact(2 * self.d)
            .map(|c| c.split_at(self.d))
    }

    /// Fraction of all sampled pairs that are edges: an estimate of the edge
    /// measure `μ²(E)`.
    pub fn edge_measure(&self) -> Estimate {
        Estimate::proportion(self.retained(), self.pair_count)
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.angles.is_empty() {
            return Err(Error::Degenerate(format!(
                "no pair out of {} reached angle {}",
                self.pair_count, self.theta
            )));
        }
        Ok(())
    }

    /// Mean of `angle/π` over retained edges: the expected fraction of edges
    /// cut by a uniform random hyperplane.
    pub fn hyperplane_expectation(&self) -> Result<Estimate> {
        self.check_nonempty()?;
        Ok(Estimate::mean_of(
            self.angles.iter().map(|a| a / PI),
            self.retained(),
        ))
    }

    /// Fraction of retained edges at angle above `theta + epsilon`.
    pub fn long_edge_fraction(&self, epsilon: f64) -> Result<Estimate> {
        self.check_nonempty()?;
        let cut = self.theta + epsilon;
        let hits = self.angles.iter().filter(|&&a| a > cut).count();
        Ok(Estimate::proportion(hits, self.retained()))
    }
}

/// A measurable subset of the sphere, tested pointwise.
#[derive(Debug, Clone)]
pub enum SideSet<'a> {
    Whole,
    /// `{x : x·normal >= 0}`.
    Hemisphere { normal: Vec<f64> },
    /// Points within angle `radius` of `center`.
    Cap { center: Vec<f64>, radius: f64 },
    CapUnion(Vec<(Vec<f64>, f64)>),
    /// Union of the cells marked `red`.
    CellColoring {
        partition: &'a CellPartition,
        red: Vec<bool>,
    },
}

fn check_unit(v: &[f64], d: usize, what: &str) -> Result<()> {
    if v.len() != d {
        return input(format!("{what} has dimension {}, expected {d}", v.len()));
    }
    if (norm(v) - 1.0).abs() > UNIT_TOLERANCE {
        return input(format!("{what} is not a unit vector"));
    }
    Ok(())
}

impl<'a> SideSet<'a> {
    /// Cap around `center` whose normalized measure is `measure`.
    pub fn cap_of_measure(center: Vec<f64>, measure: f64) -> Result<Self> {
        let radius = cap_radius_for_measure(center.len(), measure)?;
        Ok(SideSet::Cap { center, radius })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            SideSet::Whole => true,
            SideSet::Hemisphere { normal } => dot(normal, x) >= 0.0,
            SideSet::Cap { center, radius } => dot(center, x) >= radius.cos(),
            SideSet::CapUnion(caps) => caps.iter().any(|(c, r)| dot(c, x) >= r.cos()),
            SideSet::CellColoring { partition, red } => red[partition.classify(x)],
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            SideSet::Whole => Ok(()),
            SideSet::Hemisphere { normal } => check_unit(normal, d, "hemisphere normal"),
            SideSet::Cap { center, .. } => check_unit(center, d, "cap center"),
            SideSet::CapUnion(caps) => caps
                .iter()
                .try_for_each(|(c, _)| check_unit(c, d, "cap center")),
            SideSet::CellColoring { partition, red } => {
                if partition.d() != d {
                    return input(format!(
                        "partition is of S^{}, sample is in dimension {d}",
                        partition.d() - 1
                    ));
                }
                if red.len() != partition.n() {
                    return input(format!(
                        "coloring has {} entries for {} cells",
                        red.len(),
                        partition.n()
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Fraction of retained edges with exactly one endpoint in `side`: an
/// estimate of `μ_θ(A) / μ²(E)`.
pub fn estimate_cut_measure(sample: &EdgeAngleSample, side: &SideSet) -> Result<Estimate> {
    sample.check_nonempty()?;
    side.validate(sample.d)?;
    let hits = sample
        .par_pairs()
        .filter(|(x, y)| side.contains(x) != side.contains(y))
        .count();
    Ok(Estimate::proportion(hits, sample.retained()))
}

/// Estimated difference `cut(a) - cut(b)` on the same sample, with the
/// standard error of the paired indicator difference.
pub fn paired_cut_difference(sample: &EdgeAngleSample, a: &SideSet, b: &SideSet) -> Result<Estimate> {
    sample.check_nonempty()?;
    a.validate(sample.d)?;
    b.validate(sample.d)?;
    let diffs: Vec<f64> = sample
        .par_pairs()
        .map(|(x, y)| {
            let ca = (a.contains(x) != a.contains(y)) as i8;
            let cb = (b.contains(x) != b.contains(y)) as i8;
            f64::from(ca - cb)
        })
        .collect();
    Ok(Estimate::mean_of(diffs.iter().copied(), diffs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_threshold_keeps_everything() {
        let s = sample_continuous_pairs(4, 0.0, 1000, 3).unwrap();
        assert_eq!(s.retained(), 1000);
        assert_eq!(s.edge_measure().value, 1.0);
    }

    #[test]
    fn whole_sphere_cuts_nothing() {
        let s = sample_continuous_pairs(3, 2.0, 20_000, 1).unwrap();
        assert_eq!(estimate_cut_measure(&s, &SideSet::Whole).unwrap().value, 0.0);
    }

    #[test]
    fn near_pi_sample_is_degenerate() {
        let s = sample_continuous_pairs(6, PI, 1000, 1).unwrap();
        assert_eq!(s.retained(), 0);
        assert!(matches!(
            estimate_cut_measure(&s, &SideSet::Whole),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sampling_rejects_bad_arguments() {
        assert!(sample_continuous_pairs(1, 1.0, 10, 0).is_err());
        assert!(sample_continuous_pairs(3, -0.1, 10, 0).is_err());
        assert!(sample_continuous_pairs(3, 1.0, 0, 0).is_err());
        let s = sample_continuous_pairs(3, 1.0, 100, 0).unwrap();
        let bad = SideSet::Hemisphere {
            normal: vec![1.0, 0.0],
        };
        assert!(estimate_cut_measure(&s, &bad).is_err());
    }

    #[test]
    fn stored_angles_match_pairs() {
        let s = sample_continuous_pairs(5, 1.9, 5000, 8).unwrap();
        for i in 0..s.retained() {
            let (x, y) = s.pair(i);
            assert!((clamped_acos(dot(x, y)) - s.angles()[i]).abs() < 1e-15);
            assert!(s.angles()[i] >= 1.9);
        }
    }
}
