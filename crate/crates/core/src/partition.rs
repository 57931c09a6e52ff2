//! Equal-volume partitions of `S^{d-1}` into cells of small diameter.
//!
//! The sphere is cut recursively into zones: two polar caps and a sequence of
//! collars between them, each collar split into equal pieces by a partition of
//! the lower-dimensional sphere. Collar boundaries are placed at the
//! colatitudes where the cumulative cap measure equals the cumulative cell
//! count over `n`, so every cell has measure `1/n` up to root-finding error.
//!
//! Every cell is a box in hyperspherical coordinates
//! `x = (cos t₁, sin t₁ cos t₂, …, sin t₁ ⋯ sin t_{d-2} cos φ, … sin φ)`.
//!
//! Diameters are certified: for a collar `[lo, hi]` whose cross-section cells
//! have angular diameter at most `δ`, two points satisfy
//! `cos D ≥ cos t₁ cos t₂ + sin t₁ sin t₂ cos δ`, and the right side is
//! minimized over the colatitude box with an explicit Lipschitz margin.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::io::BufRead;
use std::sync::Arc;

use crate::error::{input, Error, Result};
use crate::sphere::{cap_measure_unchecked, cap_radius_unchecked, norm, sine_power_total};

pub const DEFAULT_MAX_DIMENSION: usize = 8;
pub const DEFAULT_MAX_CELLS: usize = 200_000;
/// Cell counts satisfy `n <= (PARTITION_CONSTANT / gamma)^d`.
pub const PARTITION_CONSTANT: f64 = 6.0;
const BAND_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionLimits {
    pub max_dimension: usize,
    pub max_cells: usize,
}

impl Default for PartitionLimits {
    fn default() -> Self {
        Self {
            max_dimension: DEFAULT_MAX_DIMENSION,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

#[derive(Debug)]
enum Zone {
    /// The whole sphere as a single cell.
    Whole { dim: usize },
    /// `S^1` cut into `count >= 2` equal arcs starting at angle 0.
    Arcs { count: usize },
    /// `S^{dim-1}` with `dim >= 3`: polar caps of radius `cap` plus collars.
    Bands {
        dim: usize,
        count: usize,
        cap: f64,
        collars: Vec<Collar>,
        diameter: f64,
        volume_error: f64,
    },
}

#[derive(Debug)]
struct Collar {
    lo: f64,
    hi: f64,
    /// index of this collar's first cell within the zone
    offset: usize,
    sub: Arc<Zone>,
}

impl Zone {
    fn count(&self) -> usize {
        match self {
            Zone::Whole { .. } => 1,
            Zone::Arcs { count } | Zone::Bands { count, .. } => *count,
        }
    }

    fn diameter(&self) -> f64 {
        match self {
            Zone::Whole { .. } => PI,
            Zone::Arcs { count } => (TAU / *count as f64).min(PI),
            Zone::Bands { diameter, .. } => *diameter,
        }
    }

    fn volume_error(&self) -> f64 {
        match self {
            Zone::Whole { .. } | Zone::Arcs { .. } => 0.0,
            Zone::Bands { volume_error, .. } => *volume_error,
        }
    }

    fn classify(&self, x: &[f64]) -> usize {
        match self {
            Zone::Whole { .. } => 0,
            Zone::Arcs { count } => {
                let phi = x[1].atan2(x[0]).rem_euclid(TAU);
                ((phi / TAU * *count as f64) as usize).min(count - 1)
            }
            Zone::Bands {
                count, cap, collars, ..
            } => {
                let t = x[0].clamp(-1.0, 1.0).acos();
                if t < *cap {
                    return 0;
                }
                if collars.is_empty() || t >= collars.last().unwrap().hi {
                    return count - 1;
                }
                let k = collars.partition_point(|c| c.lo <= t) - 1;
                let rest = &x[1..];
                let r = norm(rest);
                let collar = &collars[k];
                if r == 0.0 {
                    return collar.offset;
                }
                let u: Vec<f64> = rest.iter().map(|v| v / r).collect();
                collar.offset + collar.sub.classify(&u)
            }
        }
    }

    /// Coordinate box of cell `idx`: `dim - 2` colatitude ranges then one
    /// azimuth range.
    fn cell_box(&self, idx: usize, out: &mut Vec<(f64, f64)>) {
        match self {
            Zone::Whole { dim } => {
                for _ in 0..dim - 2 {
                    out.push((0.0, PI));
                }
                out.push((0.0, TAU));
            }
            Zone::Arcs { count } => {
                let w = TAU / *count as f64;
                out.push((idx as f64 * w, (idx + 1) as f64 * w));
            }
            Zone::Bands {
                dim,
                count,
                cap,
                collars,
                ..
            } => {
                let whole_rest = |out: &mut Vec<(f64, f64)>| {
                    for _ in 0..dim - 3 {
                        out.push((0.0, PI));
                    }
                    out.push((0.0, TAU));
                };
                if idx == 0 {
                    out.push((0.0, *cap));
                    whole_rest(out);
                } else if idx == count - 1 {
                    out.push((PI - cap, PI));
                    whole_rest(out);
                } else {
                    let k = collars.partition_point(|c| c.offset <= idx) - 1;
                    let c = &collars[k];
                    out.push((c.lo, c.hi));
                    c.sub.cell_box(idx - c.offset, out);
                }
            }
        }
    }

    fn push_representatives(&self, out: &mut Vec<Vec<f64>>) {
        match self {
            Zone::Whole { dim } => {
                let mut v = vec![0.0; *dim];
                v[0] = 1.0;
                out.push(v);
            }
            Zone::Arcs { count } => {
                let w = TAU / *count as f64;
                for j in 0..*count {
                    let a = (j as f64 + 0.5) * w;
                    out.push(vec![a.cos(), a.sin()]);
                }
            }
            Zone::Bands { dim, collars, .. } => {
                let mut north = vec![0.0; *dim];
                north[0] = 1.0;
                let mut south = vec![0.0; *dim];
                south[0] = -1.0;
                out.push(north);
                let mut sub_reps = Vec::new();
                for c in collars {
                    sub_reps.clear();
                    c.sub.push_representatives(&mut sub_reps);
                    let t = 0.5 * (c.lo + c.hi);
                    let (s, co) = t.sin_cos();
                    for u in &sub_reps {
                        let mut v = Vec::with_capacity(*dim);
                        v.push(co);
                        v.extend(u.iter().map(|x| s * x));
                        out.push(v);
                    }
                }
                out.push(south);
            }
        }
    }
}

/// Point with hyperspherical coordinates `coords` (length `d - 1`).
pub fn point_from_coords(coords: &[f64]) -> Vec<f64> {
    let d = coords.len() + 1;
    let mut x = vec![0.0; d];
    let mut scale = 1.0;
    for (i, &t) in coords[..d - 2].iter().enumerate() {
        x[i] = scale * t.cos();
        scale *= t.sin();
    }
    let phi = coords[d - 2];
    x[d - 2] = scale * phi.cos();
    x[d - 1] = scale * phi.sin();
    x
}

/// Surface area of `S^{dim-1}`.
fn sphere_area(dim: usize) -> f64 {
    let mut area = 2.0; // S^0
    for k in 1..dim {
        area *= sine_power_total(k - 1);
    }
    area
}

/// Certified diameter of a collar cell `[lo, hi] × C` with `diam C <= delta`.
fn band_diameter(lo: f64, hi: f64, delta: f64) -> f64 {
    if delta >= PI && lo == 0.0 {
        return (2.0 * hi).min(PI);
    }
    let c = 1.0 - delta.cos();
    let a = 1.0 - 0.5 * c;
    let b = 0.5 * c;
    let h = hi - lo;
    let mid = lo + hi;
    let g = |v: f64| a * (h - (v - mid).abs()).cos() + b * v.cos();
    let (v0, v1) = (2.0 * lo, 2.0 * hi);
    let step = (v1 - v0) / BAND_SAMPLES as f64;
    let mut best = f64::INFINITY;
    for i in 0..=BAND_SAMPLES {
        best = best.min(g(v0 + i as f64 * step));
    }
    if (v0..=v1).contains(&PI) {
        best = best.min(g(PI));
    }
    let lipschitz = a * h.min(std::f64::consts::FRAC_PI_2).sin() + b;
    let bound = (best - 0.5 * step * lipschitz).max(-1.0);
    bound.acos().min(PI)
}

type Memo = HashMap<(usize, usize), Arc<Zone>>;

fn build_zone(dim: usize, count: usize, memo: &mut Memo) -> Arc<Zone> {
    if let Some(z) = memo.get(&(dim, count)) {
        return z.clone();
    }
    let zone = if count == 1 {
        Zone::Whole { dim }
    } else if dim == 2 {
        Zone::Arcs { count }
    } else {
        build_bands(dim, count, memo)
    };
    let zone = Arc::new(zone);
    memo.insert((dim, count), zone.clone());
    zone
}

fn build_bands(dim: usize, count: usize, memo: &mut Memo) -> Zone {
    let nf = count as f64;
    if count == 2 {
        let half = std::f64::consts::FRAC_PI_2;
        return Zone::Bands {
            dim,
            count,
            cap: half,
            collars: Vec::new(),
            diameter: PI,
            volume_error: (cap_measure_unchecked(dim, half) * 2.0 - 1.0).abs(),
        };
    }
    let cap = cap_radius_unchecked(dim, 1.0 / nf);
    let sphere_dim = (dim - 1) as f64;
    let ideal_angle = (sphere_area(dim) / nf).powf(1.0 / sphere_dim);
    let span = PI - 2.0 * cap;
    let n_collars = ((span / ideal_angle).round() as usize).max(1);
    let fit = span / n_collars as f64;

    let mut counts = Vec::with_capacity(n_collars);
    let mut carry = 0.0;
    let mut prev = cap_measure_unchecked(dim, cap);
    for i in 1..=n_collars {
        let next = cap_measure_unchecked(dim, cap + i as f64 * fit);
        let ideal = (next - prev) * nf;
        prev = next;
        let rounded = (ideal + carry).round().max(0.0);
        carry += ideal - rounded;
        counts.push(rounded as usize);
    }
    // force the exact total
    let total: usize = counts.iter().sum();
    let want = count - 2;
    if total != want {
        let last = counts.iter().rposition(|&c| c > 0).unwrap_or(n_collars - 1);
        counts[last] = (counts[last] + want).saturating_sub(total);
        let fixed: usize = counts.iter().sum();
        debug_assert_eq!(fixed, want);
    }
    counts.retain(|&c| c > 0);

    let mut collars = Vec::with_capacity(counts.len());
    let mut cumulative = 1usize;
    let mut lo = cap;
    let mut diameter = (2.0 * cap).min(PI);
    let mut volume_error = (cap_measure_unchecked(dim, cap) * nf - 1.0).abs();
    for (k, &m) in counts.iter().enumerate() {
        let offset = cumulative;
        cumulative += m;
        let hi = if k + 1 == counts.len() {
            PI - cap
        } else {
            cap_radius_unchecked(dim, cumulative as f64 / nf)
        };
        let sub = build_zone(dim - 1, m, memo);
        diameter = diameter.max(band_diameter(lo, hi, sub.diameter()));
        let band = cap_measure_unchecked(dim, hi) - cap_measure_unchecked(dim, lo);
        let band_err = (band * nf / m as f64 - 1.0).abs();
        volume_error = volume_error.max((1.0 + band_err) * (1.0 + sub.volume_error()) - 1.0);
        collars.push(Collar { lo, hi, offset, sub });
        lo = hi;
    }
    Zone::Bands {
        dim,
        count,
        cap,
        collars,
        diameter,
        volume_error,
    }
}

/// A partition of `S^{d-1}` into `n` cells of equal measure with a
/// representative (the coordinate-box center) per cell.
#[derive(Debug, Clone)]
pub struct CellPartition {
    d: usize,
    gamma: f64,
    zone: Arc<Zone>,
    representatives: Vec<Vec<f64>>,
}

impl CellPartition {
    /// Partition into exactly `n` cells, with `gamma` set to the certificate.
    pub fn with_cells(d: usize, n: usize) -> Result<Self> {
        if d < 2 {
            return input(format!("dimension d = {d} must be at least 2"));
        }
        if n == 0 {
            return input("cell count must be positive");
        }
        let zone = build_zone(d, n, &mut Memo::new());
        Ok(Self::from_zone(d, zone.diameter(), zone))
    }

    fn from_zone(d: usize, gamma: f64, zone: Arc<Zone>) -> Self {
        let mut representatives = Vec::with_capacity(zone.count());
        zone.push_representatives(&mut representatives);
        Self {
            d,
            gamma,
            zone,
            representatives,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.zone.count()
    }

    /// Requested diameter bound; always at least [`Self::certified_diameter`].
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn certified_diameter(&self) -> f64 {
        self.zone.diameter()
    }

    /// Certified bound on `|vol(cell) · n - 1|` over all cells.
    pub fn volume_tolerance(&self) -> f64 {
        self.zone.volume_error()
    }

    pub fn representatives(&self) -> &[Vec<f64>] {
        &self.representatives
    }

    /// Realized constant `c = gamma · n^{1/d}` in `n <= (c/gamma)^d`.
    pub fn realized_constant(&self) -> f64 {
        self.gamma * (self.n() as f64).powf(1.0 / self.d as f64)
    }

    /// Index of the cell containing the unit vector `x`.
    pub fn classify(&self, x: &[f64]) -> usize {
        debug_assert_eq!(x.len(), self.d);
        self.zone.classify(x)
    }

    /// Hyperspherical coordinate box of cell `idx`.
    pub fn cell_box(&self, idx: usize) -> Vec<(f64, f64)> {
        assert!(idx < self.n(), "cell index out of range");
        let mut out = Vec::with_capacity(self.d - 1);
        self.zone.cell_box(idx, &mut out);
        out
    }

    pub fn points_file(&self) -> PointSet {
        PointSet {
            d: self.d,
            gamma: self.gamma,
            points: self.representatives.clone(),
        }
    }
}

/// Partition `S^{d-1}` into equal-measure cells of certified diameter at most
/// `gamma`. The cell count is found by doubling then bisecting on `n`.
pub fn partition_sphere(d: usize, gamma: f64, limits: PartitionLimits) -> Result<CellPartition> {
    if d < 2 {
        return input(format!("dimension d = {d} must be at least 2"));
    }
    if !(gamma > 0.0 && gamma < std::f64::consts::FRAC_PI_2) {
        return input(format!("gamma = {gamma} must lie in (0, π/2)"));
    }
    if d > limits.max_dimension {
        return Err(Error::Size {
            what: "partition dimension",
            actual: d,
            limit: limits.max_dimension,
        });
    }
    let mut memo = Memo::new();
    if d == 2 {
        let n = (TAU / gamma).ceil() as usize;
        // guard against the ceiling landing one short through rounding
        let n = if TAU / n as f64 > gamma { n + 1 } else { n };
        check_cells(n, limits)?;
        return Ok(CellPartition::from_zone(d, gamma, build_zone(2, n, &mut memo)));
    }
    let fits = |n: usize, memo: &mut Memo| build_zone(d, n, memo).diameter() <= gamma;
    let mut fail = 1usize;
    let mut ok = 2usize;
    while !fits(ok, &mut memo) {
        fail = ok;
        ok *= 2;
        if ok > 2 * limits.max_cells {
            return Err(Error::Size {
                what: "cell count",
                actual: ok,
                limit: limits.max_cells,
            });
        }
    }
    while ok - fail > 1 {
        let mid = fail + (ok - fail) / 2;
        if fits(mid, &mut memo) {
            ok = mid;
        } else {
            fail = mid;
        }
    }
    check_cells(ok, limits)?;
    let zone = build_zone(d, ok, &mut memo);
    Ok(CellPartition::from_zone(d, gamma, zone))
}

fn check_cells(n: usize, limits: PartitionLimits) -> Result<()> {
    if n > limits.max_cells {
        return Err(Error::Size {
            what: "cell count",
            actual: n,
            limit: limits.max_cells,
        });
    }
    Ok(())
}

/// A list of unit vectors with the text format `d n gamma` then one vector per
/// line. Used for partition representatives and construction points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub d: usize,
    pub gamma: f64,
    pub points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.d, self.points.len(), self.gamma).unwrap();
        for p in &self.points {
            write_vector(&mut out, p);
        }
        out
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let (header, rows) = read_vectors(reader, 3)?;
        let d: usize = parse_field(&header.1[0], header.0)?;
        let n: usize = parse_field(&header.1[1], header.0)?;
        let gamma: f64 = parse_field(&header.1[2], header.0)?;
        let points = check_rows(rows, n, d)?;
        Ok(Self { d, gamma, points })
    }
}

pub(crate) fn write_vector(out: &mut String, v: &[f64]) {
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{x:?}").unwrap();
    }
    out.push('\n');
}

type Row = (usize, Vec<String>);

pub(crate) fn read_vectors(reader: impl BufRead, header_fields: usize) -> Result<(Row, Vec<Row>)> {
    let mut header = None;
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = t.split_whitespace().map(str::to_owned).collect();
        if header.is_none() {
            if fields.len() != header_fields {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("header needs {header_fields} fields"),
                });
            }
            header = Some((idx + 1, fields));
        } else {
            rows.push((idx + 1, fields));
        }
    }
    let header = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    Ok((header, rows))
}

pub(crate) fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {s:?}"),
    })
}

/// Parses `n` rows of `dim` floats and re-validates unit norms.
pub(crate) fn check_rows(rows: Vec<Row>, n: usize, dim: usize) -> Result<Vec<Vec<f64>>> {
    if rows.len() != n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {n} vectors, found {}", rows.len()),
        });
    }
    rows.into_iter()
        .map(|(line, fields)| {
            if fields.len() != dim {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {dim} coordinates, found {}", fields.len()),
                });
            }
            let v = fields
                .iter()
                .map(|f| parse_field::<f64>(f, line))
                .collect::<Result<Vec<f64>>>()?;
            let nv = norm(&v);
            if (nv - 1.0).abs() > crate::sphere::UNIT_TOLERANCE {
                return Err(Error::Parse {
                    line,
                    msg: format!("vector norm {nv} is not 1"),
                });
            }
            Ok(v)
        })
        .collect()
}
