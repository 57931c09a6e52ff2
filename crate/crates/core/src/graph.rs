//! Simple undirected graphs, exact and heuristic MaxCut, surplus arithmetic.

use std::fmt::Write as _;
use std::io::BufRead;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::rng::{substream, Stream};

/// Largest exact-enumeration size supported by the 64-bit mask representation.
pub const EXACT_HARD_LIMIT: usize = 63;
pub const DEFAULT_EXACT_LIMIT: usize = 30;

/// Immutable simple graph on vertices `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. The adjacency view
/// is a per-vertex bitset kept consistent with the edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<u64>>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return input("graph needs at least one vertex");
        }
        let words = n.div_ceil(64);
        let mut adjacency = vec![vec![0u64; words]; n];
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return input(format!("edge ({a}, {b}) out of range for n = {n}"));
            }
            if a == b {
                return input(format!("self-loop at vertex {a}"));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if adjacency[u][v / 64] >> (v % 64) & 1 == 1 {
                return input(format!("duplicate edge ({u}, {v})"));
            }
            adjacency[u][v / 64] |= 1 << (v % 64);
            adjacency[v][u / 64] |= 1 << (u % 64);
            list.push((u, v));
        }
        list.sort_unstable();
        Ok(Self {
            n,
            edges: list,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges `m = e(G)`.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adjacency[u][v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Neighbor mask of `v`; only meaningful when `n <= 64`.
    fn mask(&self, v: usize) -> u64 {
        self.adjacency[v][0]
    }

    /// Vertex relabeling: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return input("permutation length differs from vertex count");
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return input("not a permutation");
            }
        }
        Self::from_edges(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    /// Number of edges with exactly one endpoint in `side`.
    pub fn cut_value(&self, side: &[usize]) -> Result<usize> {
        let mut member = vec![false; self.n];
        for &v in side {
            if v >= self.n {
                return input(format!("vertex {v} out of range for n = {}", self.n));
            }
            member[v] = true;
        }
        Ok(self.cut_value_of(&member))
    }

    /// Same as [`Graph::cut_value`] for a membership vector of length `n`.
    pub fn cut_value_of(&self, member: &[bool]) -> usize {
        debug_assert_eq!(member.len(), self.n);
        self.edges
            .iter()
            .filter(|&&(u, v)| member[u] != member[v])
            .count()
    }

    /// Dense adjacency matrix as row-major `f64`.
    pub fn adjacency_matrix(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n * self.n];
        for &(u, v) in &self.edges {
            a[u * self.n + v] = 1.0;
            a[v * self.n + u] = 1.0;
        }
        a
    }

    /// Plain-text edge list: `n m` header then one `u v` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + 12 * self.m());
        writeln!(out, "{} {}", self.n, self.m()).unwrap();
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    /// Reads the edge-list format. Lines starting with `#` are comments.
    pub fn read_edge_list(reader: impl BufRead) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let pair = parse_pair(t).ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected two integers, got {t:?}"),
            })?;
            if header.is_none() {
                header = Some(pair);
            } else {
                edges.push((pair, line_no));
            }
        }
        let (n, m) = header.ok_or(Error::Parse {
            line: 0,
            msg: "missing `n m` header".into(),
        })?;
        if edges.len() != m {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(n, edges.iter().map(|&(p, _)| p)).map_err(|e| match e {
            Error::Input(msg) => Error::Parse { line: 0, msg },
            other => other,
        })
    }
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let mut it = s.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    it.next().is_none().then_some((a, b))
}

/// A vertex bipartition together with its cut size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutResult {
    pub side: Vec<bool>,
    pub value: usize,
    pub exact: bool,
}

impl CutResult {
    pub fn members(&self) -> Vec<usize> {
        self.side
            .iter()
            .enumerate()
            .filter_map(|(v, &s)| s.then_some(v))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let members: Vec<String> = self.members().iter().map(|v| v.to_string()).collect();
        format!(
            "value {}\nexact {}\nside {}\n",
            self.value,
            self.exact,
            members.join(" ")
        )
    }
}

/// Exhaustive MaxCut over all sides containing vertex 0.
///
/// The side space is split into fixed chunks by the highest free bits; each
/// chunk walks its low bits in Gray-code order with incremental updates. Ties
/// resolve to the numerically smallest side mask, so the answer does not
/// depend on scheduling.
pub fn maxcut_exact(g: &Graph, limit: usize) -> Result<CutResult> {
    let limit = limit.min(EXACT_HARD_LIMIT);
    if g.n() > limit {
        return Err(Error::Size {
            what: "vertex count for exact MaxCut",
            actual: g.n(),
            limit,
        });
    }
    let n = g.n();
    if n == 1 {
        return Ok(CutResult {
            side: vec![true],
            value: 0,
            exact: true,
        });
    }
    let masks: Vec<u64> = (0..n).map(|v| g.mask(v)).collect();
    let free = n - 1; // vertices 1..n
    let high = free.min(10);
    let low = free - high;
    let chunk_best = |chunk: u64| -> (usize, u64) {
        // side bit layout: bit v for vertex v; vertex 0 always in.
        let base = 1u64 | (chunk << (1 + low));
        let mut side = base;
        let mut value = cut_of_mask(&masks, side) as i64;
        let mut best = (value as usize, side);
        for step in 1u64..(1u64 << low) {
            let bit = step.trailing_zeros() as usize;
            let v = 1 + bit;
            let nb = masks[v];
            let in_side = (nb & side).count_ones() as i64;
            let out_side = nb.count_ones() as i64 - in_side;
            if side >> v & 1 == 1 {
                value += in_side - out_side;
            } else {
                value += out_side - in_side;
            }
            side ^= 1 << v;
            let cand = (value as usize, side);
            if cand.0 > best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                best = cand;
            }
        }
        best
    };
    let (value, side) = (0..(1u64 << high))
        .into_par_iter()
        .map(chunk_best)
        .reduce(
            || (0, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    Ok(CutResult {
        side: (0..n).map(|v| side >> v & 1 == 1).collect(),
        value,
        exact: true,
    })
}

fn cut_of_mask(masks: &[u64], side: u64) -> usize {
    let full = if masks.len() == 64 {
        u64::MAX
    } else {
        (1u64 << masks.len()) - 1
    };
    let outside = !side & full;
    masks
        .iter()
        .enumerate()
        .filter(|&(v, _)| side >> v & 1 == 1)
        .map(|(_, &nb)| (nb & outside).count_ones() as usize)
        .sum()
}

/// Single-flip local search from `restarts` random starting sides.
///
/// Each pass scans vertices in index order and applies the first improving
/// flip. Restart `k` draws its start from the local-search substream `k` of
/// `seed`; the best restart wins, earliest on ties.
pub fn maxcut_local_search(g: &Graph, seed: u64, restarts: usize) -> Result<CutResult> {
    if restarts == 0 {
        return input("restarts must be at least 1");
    }
    let results: Vec<(usize, Vec<bool>)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, Stream::LocalSearch, k as u64);
            let side: Vec<bool> = (0..g.n()).map(|_| rng.random::<bool>()).collect();
            local_optimum(g, side)
        })
        .collect();
    let mut best = 0;
    for (k, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = k;
        }
    }
    let (value, side) = results.into_iter().nth(best).unwrap();
    Ok(CutResult {
        side,
        value,
        exact: false,
    })
}

fn local_optimum(g: &Graph, mut side: Vec<bool>) -> (usize, Vec<bool>) {
    let n = g.n();
    // same[v]: neighbors of v on v's own side
    let mut same: Vec<i64> = (0..n)
        .map(|v| g.neighbors(v).filter(|&u| side[u] == side[v]).count() as i64)
        .collect();
    let degree: Vec<i64> = (0..n).map(|v| g.degree(v) as i64).collect();
    let mut value = g.cut_value_of(&side);
    'outer: loop {
        for v in 0..n {
            let gain = 2 * same[v] - degree[v];
            if gain > 0 {
                side[v] = !side[v];
                value = (value as i64 + gain) as usize;
                same[v] = degree[v] - same[v];
                for u in g.neighbors(v) {
                    if side[u] == side[v] {
                        same[u] += 1;
                    } else {
                        same[u] -= 1;
                    }
                }
                continue 'outer;
            }
        }
        break;
    }
    (value, side)
}

/// Surplus `mc - m/2`, stored exactly as a half-integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Surplus {
    twice: i64,
}

impl Surplus {
    pub fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub fn twice(self) -> i64 {
        self.twice
    }

    pub fn as_ratio(self) -> Ratio<i64> {
        Ratio::new(self.twice, 2)
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl std::fmt::Display for Surplus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

pub fn surplus(m: usize, mc: usize) -> Result<Surplus> {
    if mc > m {
        return input(format!("cut value {mc} exceeds edge count {m}"));
    }
    Ok(Surplus {
        twice: 2 * mc as i64 - m as i64,
    })
}

/// Edwards lower bound `(sqrt(8m + 1) - 1) / 8` on the surplus.
pub fn edwards_bound(m: usize) -> f64 {
    (((8 * m + 1) as f64).sqrt() - 1.0) / 8.0
}

/// The Edwards bound as an exact rational when `8m + 1` is a perfect square
/// (which is the case for complete graphs).
pub fn edwards_bound_exact(m: usize) -> Option<Ratio<i64>> {
    let target = 8 * m as u64 + 1;
    let mut root = (target as f64).sqrt() as u64;
    while root * root > target {
        root -= 1;
    }
    while (root + 1) * (root + 1) <= target {
        root += 1;
    }
    (root * root == target).then(|| Ratio::new(root as i64 - 1, 8))
}

/// Standard graph families used throughout tests and sweeps.
pub mod families {
    use super::*;

    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(n, edges).expect("complete graph")
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Graph {
        let edges = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v)));
        Graph::from_edges(a + b, edges).expect("complete bipartite graph")
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle")
    }

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path")
    }

    pub fn petersen() -> Graph {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Graph::from_edges(10, outer.chain(spokes).chain(inner)).expect("petersen")
    }

    /// Erdős–Rényi `G(n, p)` drawn from the experiment substream of `seed`.
    pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = substream(seed, Stream::Experiment, n as u64);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).expect("gnp")
    }
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;

    #[test]
    fn cut_value_examples() {
        assert_eq!(complete(3).cut_value(&[0]).unwrap(), 2);
        assert_eq!(petersen().cut_value(&[]).unwrap(), 0);
        assert_eq!(cycle(5).cut_value(&[0, 2]).unwrap(), 4);
        assert!(matches!(cycle(5).cut_value(&[5]), Err(Error::Input(_))));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
        assert!(Graph::from_edges(0, []).is_err());
    }

    #[test]
    fn adjacency_matches_edges() {
        let g = gnp(70, 0.3, 4);
        let mut count = 0;
        for u in 0..g.n() {
            for v in 0..g.n() {
                if g.has_edge(u, v) {
                    assert!(g.has_edge(v, u));
                    count += 1;
                }
            }
            assert_eq!(g.neighbors(u).count(), g.degree(u));
        }
        assert_eq!(count, 2 * g.m());
    }

    #[test]
    fn exact_small_values() {
        assert_eq!(maxcut_exact(&complete(3), 30).unwrap().value, 2);
        assert_eq!(maxcut_exact(&complete(5), 30).unwrap().value, 6);
        assert_eq!(maxcut_exact(&cycle(5), 30).unwrap().value, 4);
        assert_eq!(maxcut_exact(&complete_bipartite(3, 3), 30).unwrap().value, 9);
        let single = Graph::from_edges(1, []).unwrap();
        assert_eq!(maxcut_exact(&single, 30).unwrap().value, 0);
    }

    #[test]
    fn exact_refuses_above_limit() {
        let g = cycle(12);
        assert!(matches!(
            maxcut_exact(&g, 10),
            Err(Error::Size { actual: 12, .. })
        ));
    }

    #[test]
    fn exact_result_is_consistent() {
        let g = gnp(14, 0.5, 9);
        let r = maxcut_exact(&g, 30).unwrap();
        assert!(r.exact);
        assert!(r.side[0]);
        assert_eq!(g.cut_value_of(&r.side), r.value);
    }

    #[test]
    fn local_search_examples() {
        for seed in 0..5 {
            assert_eq!(maxcut_local_search(&complete(3), seed, 1).unwrap().value, 2);
            assert_eq!(maxcut_local_search(&cycle(5), seed, 1).unwrap().value, 4);
            assert_eq!(
                maxcut_local_search(&complete_bipartite(3, 3), seed, 1)
                    .unwrap()
                    .value,
                9
            );
        }
        assert!(maxcut_local_search(&cycle(5), 0, 0).is_err());
    }

    #[test]
    fn local_search_is_single_flip_optimal() {
        let g = gnp(40, 0.3, 2);
        let r = maxcut_local_search(&g, 11, 3).unwrap();
        assert!(!r.exact);
        assert_eq!(g.cut_value_of(&r.side), r.value);
        for v in 0..g.n() {
            let mut s = r.side.clone();
            s[v] = !s[v];
            assert!(g.cut_value_of(&s) <= r.value);
        }
        assert_eq!(r, maxcut_local_search(&g, 11, 3).unwrap());
    }

    #[test]
    fn surplus_examples() {
        assert_eq!(surplus(3, 2).unwrap().as_ratio(), Ratio::new(1, 2));
        assert_eq!(surplus(10, 6).unwrap().as_ratio(), Ratio::from_integer(1));
        assert_eq!(surplus(0, 0).unwrap().as_ratio(), Ratio::from_integer(0));
        assert!(surplus(3, 4).is_err());
        assert_eq!(surplus(3, 2).unwrap().to_string(), "1/2");
    }

    #[test]
    fn edwards_examples() {
        assert_eq!(edwards_bound(0), 0.0);
        assert!((edwards_bound(10) - 1.0).abs() < 1e-15);
        // K_7: (sqrt(169) - 1) / 8 = 3/2
        assert!((edwards_bound(21) - 1.5).abs() < 1e-15);
        assert_eq!(edwards_bound_exact(21), Some(Ratio::new(3, 2)));
        assert_eq!(edwards_bound_exact(11), None);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = petersen();
        let text = g.to_edge_list();
        let back = Graph::read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g, back);
        assert!(Graph::read_edge_list("2 1\n0 0\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("3 2\n0 1\n1 0\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("3 2\n0 1\n".as_bytes()).is_err());
        let commented = "# header\n3 1\n# edge\n0 2\n";
        assert_eq!(Graph::read_edge_list(commented.as_bytes()).unwrap().m(), 1);
    }
}
