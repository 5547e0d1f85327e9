//! Torus geometry and the measure families compared by the experiments.

use crate::flows::VectorField;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("weights sum to {0}, expected 1 within 1e-12")]
    BadMass(f64),
    #[error("supports and weights have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("p and q must be coprime (got p={p}, q={q})")]
    NotCoprime { p: i64, q: i64 },
    #[error("q must be positive")]
    BadDenominator,
    #[error("line-family operations require dimension 2")]
    NotPlanar,
    #[error("trajectory window after burn-in is empty")]
    EmptyWindow,
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("velocities required for tangent-bundle measures")]
    MissingVelocities,
    #[error("grid masses must be nonnegative and sum to 1 (sum = {0})")]
    BadGridMass(f64),
    #[error("decode error: {0}")]
    Decode(String),
}

/// A point of 𝕋ⁿ with every coordinate reduced into [0,1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint(Vec<f64>);

/// Reduce a coordinate into [0,1). `rem_euclid` may round up to exactly 1.0
/// for tiny negative inputs, which must fold back to 0.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, MeasureError> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MeasureError::NonFinite);
        }
        Ok(TorusPoint(coords.into_iter().map(wrap_unit).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// Geodesic distance on the flat torus: min over integer shifts of the
/// Euclidean distance; per coordinate this is min(|d|, 1−|d|).
pub fn torus_distance(x: &TorusPoint, y: &TorusPoint) -> Result<f64, MeasureError> {
    if x.dim() != y.dim() {
        return Err(MeasureError::DimensionMismatch(x.dim(), y.dim()));
    }
    Ok(torus_distance_coords(x.coords(), y.coords()))
}

pub(crate) fn torus_distance_coords(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = (a - b).abs();
        let d = d.min(1.0 - d);
        acc += d * d;
    }
    acc.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    #[serde(rename = "base-torus")]
    Base,
    #[serde(rename = "tangent-bundle")]
    Tangent,
}

/// Weighted point cloud on 𝕋ⁿ or on the tangent bundle T𝕋ⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub space_tag: SpaceTag,
    pub points: Vec<TorusPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocities: Option<Vec<Vec<f64>>>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(
        space_tag: SpaceTag,
        points: Vec<TorusPoint>,
        velocities: Option<Vec<Vec<f64>>>,
        weights: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        if points.len() != weights.len() {
            return Err(MeasureError::LengthMismatch(points.len(), weights.len()));
        }
        if let Some(v) = &velocities {
            if v.len() != points.len() {
                return Err(MeasureError::LengthMismatch(points.len(), v.len()));
            }
            for (p, vel) in points.iter().zip(v) {
                if vel.len() != p.dim() {
                    return Err(MeasureError::DimensionMismatch(p.dim(), vel.len()));
                }
                if vel.iter().any(|c| !c.is_finite()) {
                    return Err(MeasureError::NonFinite);
                }
            }
        }
        if space_tag == SpaceTag::Tangent && velocities.is_none() {
            return Err(MeasureError::MissingVelocities);
        }
        // Kahan-compensated total: large clouds would otherwise show pure
        // rounding noise above the 1e-12 mass tolerance.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(MeasureError::NegativeWeight(w));
            }
            let y = w - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MeasureError::BadMass(sum));
        }
        if let Some(first) = points.first() {
            let d = first.dim();
            if points.iter().any(|p| p.dim() != d) {
                return Err(MeasureError::DimensionMismatch(d, 0));
            }
        }
        Ok(DiscreteMeasure { space_tag, points, velocities, weights })
    }

    pub fn uniform(points: Vec<TorusPoint>) -> Result<Self, MeasureError> {
        let n = points.len().max(1);
        let w = vec![1.0 / n as f64; points.len()];
        Self::new(SpaceTag::Base, points, None, w)
    }

    pub fn uniform_tangent(points: Vec<TorusPoint>, velocities: Vec<Vec<f64>>) -> Result<Self, MeasureError> {
        let n = points.len().max(1);
        let w = vec![1.0 / n as f64; points.len()];
        Self::new(SpaceTag::Tangent, points, Some(velocities), w)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map(|p| p.dim()).unwrap_or(0)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        let raw: DiscreteMeasure =
            serde_json::from_str(text).map_err(|e| MeasureError::Decode(e.to_string()))?;
        // Re-validate through the constructor: serde bypasses the invariants.
        Self::new(raw.space_tag, raw.points, raw.velocities, raw.weights)
    }

    /// Binary column layout for large clouds (all integers and floats
    /// little-endian):
    ///
    /// ```text
    /// magic  b"MCL1"          4 bytes
    /// tag    u8               0 = base torus, 1 = tangent bundle
    /// dim    u8               1..=16
    /// pad    [u8; 2]          must be zero
    /// count  u64
    /// points count*dim f64
    /// vels   count*dim f64    present iff tag == 1
    /// weights count    f64
    /// ```
    pub fn to_binary(&self) -> Vec<u8> {
        let dim = self.dim();
        let count = self.len();
        let mut out = Vec::with_capacity(16 + count * (dim + 1) * 8);
        out.extend_from_slice(b"MCL1");
        out.push(match self.space_tag {
            SpaceTag::Base => 0,
            SpaceTag::Tangent => 1,
        });
        out.push(dim as u8);
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&(count as u64).to_le_bytes());
        for p in &self.points {
            for &c in p.coords() {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        if let Some(vels) = &self.velocities {
            for v in vels {
                for &c in v {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
        for &w in &self.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self, MeasureError> {
        let err = |m: &str| MeasureError::Decode(m.to_string());
        if bytes.len() < 16 {
            return Err(err("truncated header"));
        }
        if &bytes[0..4] != b"MCL1" {
            return Err(err("bad magic"));
        }
        let tag = match bytes[4] {
            0 => SpaceTag::Base,
            1 => SpaceTag::Tangent,
            t => return Err(MeasureError::Decode(format!("bad space tag {t}"))),
        };
        let dim = bytes[5] as usize;
        if dim == 0 || dim > 16 {
            return Err(MeasureError::Decode(format!("bad dimension {dim}")));
        }
        if bytes[6] != 0 || bytes[7] != 0 {
            return Err(err("nonzero padding"));
        }
        let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let blocks = if tag == SpaceTag::Tangent { 2 * dim + 1 } else { dim + 1 };
        let expected = count
            .checked_mul(blocks)
            .and_then(|v| v.checked_mul(8))
            .and_then(|v| v.checked_add(16))
            .ok_or_else(|| err("size overflow"))?;
        if bytes.len() != expected {
            return Err(MeasureError::Decode(format!(
                "payload length {} does not match header ({} expected)",
                bytes.len(),
                expected
            )));
        }
        let mut cursor = 16;
        let mut read_f64 = |bytes: &[u8]| {
            let v = f64::from_le_bytes(bytes[cursor..cursor + 8].try_into().unwrap());
            cursor += 8;
            v
        };
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            let coords: Vec<f64> = (0..dim).map(|_| read_f64(bytes)).collect();
            points.push(TorusPoint::new(coords)?);
        }
        let velocities = if tag == SpaceTag::Tangent {
            let mut vels = Vec::with_capacity(count);
            for _ in 0..count {
                let v: Vec<f64> = (0..dim).map(|_| read_f64(bytes)).collect();
                vels.push(v);
            }
            Some(vels)
        } else {
            None
        };
        let weights: Vec<f64> = (0..count).map(|_| read_f64(bytes)).collect();
        Self::new(tag, points, velocities, weights)
    }
}

/// The invariant measure of the rational flow (1, p/q) on 𝕋²: q parallel
/// closed segments y = (p/q)x + i/q, each carrying arc-length mass 1/q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFamilyMeasure {
    p: i64,
    q: i64,
}

impl LineFamilyMeasure {
    pub fn new(p: i64, q: i64) -> Result<Self, MeasureError> {
        if q < 1 {
            return Err(MeasureError::BadDenominator);
        }
        if num_integer::gcd(p, q) != 1 {
            return Err(MeasureError::NotCoprime { p, q });
        }
        Ok(LineFamilyMeasure { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// Number of parallel segments in the fundamental domain.
    pub fn line_count(&self) -> usize {
        self.q as usize
    }

    pub fn slope(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Perpendicular gap between consecutive lines,
    /// d = 1/(q√(1+(p/q)²)) = 1/√(p²+q²).
    pub fn gap(&self) -> f64 {
        1.0 / ((self.p * self.p + self.q * self.q) as f64).sqrt()
    }

    /// The point of line i at abscissa x.
    pub fn line_point(&self, line: usize, x: f64) -> TorusPoint {
        let y = self.slope() * x + line as f64 / self.q as f64;
        TorusPoint::new(vec![x, y]).expect("finite coordinates")
    }

    /// Stratified equal-arc-length sampling: `per_line` points per line at
    /// abscissae (j + phase)/per_line. Matched comparisons of two samplings
    /// of the same family should use a common `phase`.
    pub fn sample_points(&self, per_line: usize, phase: f64) -> DiscreteMeasure {
        let mut points = Vec::with_capacity(per_line * self.line_count());
        for i in 0..self.line_count() {
            for j in 0..per_line {
                let x = wrap_unit((j as f64 + phase) / per_line as f64);
                points.push(self.line_point(i, x));
            }
        }
        DiscreteMeasure::uniform(points).expect("uniform weights are valid")
    }
}

/// Distance from x to the nearest line of the family. In the strip
/// coordinate s = q·(y − (p/q)x) mod 1 the lines sit at s = 0, so the
/// perpendicular distance is ‖s‖·gap, with ‖s‖ the distance of s to ℤ.
pub fn min_dist_to_lines(x: &TorusPoint, family: &LineFamilyMeasure) -> Result<f64, MeasureError> {
    if x.dim() != 2 {
        return Err(MeasureError::NotPlanar);
    }
    let c = x.coords();
    Ok(strip_distance(c[0], c[1], family))
}

pub(crate) fn strip_distance(x: f64, y: f64, family: &LineFamilyMeasure) -> f64 {
    let s = wrap_unit(family.q as f64 * (y - family.slope() * x));
    s.min(1.0 - s) * family.gap()
}

/// Nonnegative cell masses on a uniform tensor grid, summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub resolution: Vec<usize>,
    pub masses: Vec<f64>,
}

impl GridDensity {
    pub fn new(resolution: Vec<usize>, masses: Vec<f64>) -> Result<Self, MeasureError> {
        let cells: usize = resolution.iter().product();
        if cells != masses.len() {
            return Err(MeasureError::LengthMismatch(cells, masses.len()));
        }
        let sum: f64 = masses.iter().sum();
        if masses.iter().any(|&m| !(m >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(MeasureError::BadGridMass(sum));
        }
        Ok(GridDensity { resolution, masses })
    }

    /// Uniform (Lebesgue) density.
    pub fn lebesgue(resolution: Vec<usize>) -> Self {
        let cells: usize = resolution.iter().product();
        GridDensity { masses: vec![1.0 / cells as f64; cells], resolution }
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    /// Cell-center quadrature nodes with their masses.
    pub fn cell_centers(&self) -> Vec<(TorusPoint, f64)> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(self.masses.len());
        let mut idx = vec![0usize; dim];
        for (flat, &mass) in self.masses.iter().enumerate() {
            let mut rem = flat;
            for j in (0..dim).rev() {
                idx[j] = rem % self.resolution[j];
                rem /= self.resolution[j];
            }
            let coords: Vec<f64> =
                idx.iter().zip(&self.resolution).map(|(&i, &n)| (i as f64 + 0.5) / n as f64).collect();
            out.push((TorusPoint::new(coords).unwrap(), mass));
        }
        out
    }

    pub fn to_discrete(&self) -> DiscreteMeasure {
        let (points, weights): (Vec<_>, Vec<_>) = self.cell_centers().into_iter().unzip();
        DiscreteMeasure::new(SpaceTag::Base, points, None, weights).expect("grid masses are a valid measure")
    }
}

/// A base measure carried to the tangent bundle along the graph of a field:
/// ∫Φ(x,v) d(lift) = ∫Φ(x, V(x)) d(base).
#[derive(Debug, Clone)]
pub struct GraphLiftMeasure {
    pub base: Box<TorusMeasure>,
    pub field: VectorField,
}

/// Tagged union over the measure families used by the experiments.
#[derive(Debug, Clone)]
pub enum TorusMeasure {
    Discrete(DiscreteMeasure),
    Lines(LineFamilyMeasure),
    Grid(GridDensity),
    Lift(GraphLiftMeasure),
}

impl TorusMeasure {
    pub fn dim(&self) -> usize {
        match self {
            TorusMeasure::Discrete(m) => m.dim(),
            TorusMeasure::Lines(_) => 2,
            TorusMeasure::Grid(g) => g.dim(),
            TorusMeasure::Lift(l) => l.base.dim(),
        }
    }

    /// Integrate a base-torus observable. Line families integrate by dense
    /// per-line arc sampling (midpoint rule along each segment).
    pub fn integrate(&self, f: &dyn Fn(&[f64]) -> f64) -> f64 {
        match self {
            TorusMeasure::Discrete(m) => m
                .points
                .iter()
                .zip(&m.weights)
                .map(|(p, &w)| w * f(p.coords()))
                .sum(),
            TorusMeasure::Grid(g) => g
                .cell_centers()
                .into_iter()
                .map(|(p, w)| w * f(p.coords()))
                .sum(),
            TorusMeasure::Lines(l) => {
                let per = 512;
                let mut acc = 0.0;
                for i in 0..l.line_count() {
                    for j in 0..per {
                        let x = (j as f64 + 0.5) / per as f64;
                        acc += f(l.line_point(i, x).coords());
                    }
                }
                acc / (per * l.line_count()) as f64
            }
            TorusMeasure::Lift(lift) => lift.base.integrate(f),
        }
    }

    /// Integrate a tangent-bundle observable: graph lifts evaluate along
    /// (x, V(x)); tangent-tagged point clouds use their stored velocities;
    /// base measures pair with the zero section.
    pub fn integrate_tangent(&self, phi: &dyn Fn(&[f64], &[f64]) -> f64) -> f64 {
        match self {
            TorusMeasure::Lift(lift) => {
                let field = lift.field.clone();
                lift.base.integrate(&move |x: &[f64]| phi(x, &field.eval(x)))
            }
            TorusMeasure::Discrete(m) => match &m.velocities {
                Some(vels) => m
                    .points
                    .iter()
                    .zip(vels)
                    .zip(&m.weights)
                    .map(|((p, v), &w)| w * phi(p.coords(), v))
                    .sum(),
                None => {
                    let zero = vec![0.0; m.dim()];
                    m.points.iter().zip(&m.weights).map(|(p, &w)| w * phi(p.coords(), &zero)).sum()
                }
            },
            other => {
                let dim = other.dim();
                let zero = vec![0.0; dim];
                other.integrate(&move |x: &[f64]| phi(x, &zero))
            }
        }
    }
}

/// Lift a base measure along a vector field.
pub fn graph_lift(base: TorusMeasure, field: VectorField) -> Result<GraphLiftMeasure, MeasureError> {
    if base.dim() != field.dim() {
        return Err(MeasureError::DimensionMismatch(base.dim(), field.dim()));
    }
    Ok(GraphLiftMeasure { base: Box::new(base), field })
}

/// Project a graph lift back to its base (the left inverse of lifting).
pub fn project_lift(lift: &GraphLiftMeasure) -> TorusMeasure {
    (*lift.base).clone()
}

/// Push a discrete measure through a pointwise map; weights are untouched.
pub fn pushforward(
    mu: &DiscreteMeasure,
    map: &dyn Fn(&TorusPoint) -> TorusPoint,
) -> DiscreteMeasure {
    let points: Vec<TorusPoint> = mu.points.iter().map(map).collect();
    DiscreteMeasure {
        space_tag: mu.space_tag,
        points,
        velocities: mu.velocities.clone(),
        weights: mu.weights.clone(),
    }
}

/// Time average of a trajectory after discarding `burn_in`: uniform weights
/// on the retained samples, tangent-tagged when velocities are present.
pub fn empirical_from_trajectory(
    traj: &crate::flows::Trajectory,
    burn_in: f64,
) -> Result<DiscreteMeasure, MeasureError> {
    let keep: Vec<usize> =
        (0..traj.len()).filter(|&i| traj.times()[i] > burn_in).collect();
    if keep.is_empty() {
        return Err(MeasureError::EmptyWindow);
    }
    let points: Vec<TorusPoint> = keep.iter().map(|&i| traj.points()[i].clone()).collect();
    let velocities: Vec<Vec<f64>> = keep.iter().map(|&i| traj.velocities()[i].clone()).collect();
    DiscreteMeasure::uniform_tangent(points, velocities)
}

/// Kronecker (golden-ratio) low-discrepancy cloud on 𝕋ⁿ.
pub fn kronecker_cloud(count: usize, dim: usize) -> DiscreteMeasure {
    // Generalized golden ratios: x_{k} = k * alpha mod 1 per axis.
    let mut alphas = vec![0.0f64; dim];
    let mut gamma = 1.0f64;
    // gamma solves x^(d+1) = x + 1; fixed-point iteration.
    for _ in 0..64 {
        gamma = (1.0 + gamma).powf(1.0 / (dim as f64 + 1.0));
    }
    for (j, a) in alphas.iter_mut().enumerate() {
        *a = (1.0 / gamma).powi(j as i32 + 1);
    }
    let points: Vec<TorusPoint> = (1..=count)
        .map(|k| {
            TorusPoint::new(alphas.iter().map(|&a| wrap_unit(0.5 + k as f64 * a)).collect()).unwrap()
        })
        .collect();
    DiscreteMeasure::uniform(points).unwrap()
}
