//! Wasserstein-1 distances on the torus by four routes: exact discrete
//! min-cost flow, log-domain entropic approximation, Kantorovich–Rubinstein
//! dual lower bounds, and the closed form for line-family measures.

mod mincost;
mod sinkhorn;

use crate::measures::{
    strip_distance, torus_distance_coords, DiscreteMeasure, GridDensity, LineFamilyMeasure,
    MeasureError, SpaceTag, TorusMeasure, TorusPoint,
};
use rand::Rng;
use rand::SeedableRng;
use serde::Serialize;
use std::io::Write;
use thiserror::Error;

/// Weight quantization for the exact solver: probability masses become
/// integer units of 1e-12, the residual goes to the heaviest atom.
const MASS_SCALE: f64 = 1e12;

/// Largest support size accepted by the exact solver.
pub const EXACT_SUPPORT_LIMIT: usize = 5000;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("support size {0} exceeds the exact-solver limit {EXACT_SUPPORT_LIMIT}")]
    SizeExceeded(usize),
    #[error("measures live on different spaces")]
    SpaceTagMismatch,
    #[error("marginal mismatch: plan marginals deviate by {0:e}")]
    MarginalMismatch(f64),
    #[error("Sinkhorn did not converge: marginal violation {violation:e} after {iterations} iterations")]
    NotConverged { violation: f64, iterations: u64 },
    #[error("potential {index} violates the 1-Lipschitz bound by {excess:e}")]
    LipschitzViolation { index: usize, excess: f64 },
    #[error("regularization must be positive (got {0})")]
    BadRegularization(f64),
    #[error("empty measure")]
    EmptyMeasure,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "exact-discrete")]
    ExactDiscrete,
    #[serde(rename = "entropic")]
    Entropic,
    #[serde(rename = "kr-dual")]
    KrDual,
    #[serde(rename = "closed-form-lines")]
    ClosedFormLines,
    #[serde(rename = "lifted-lower")]
    LiftedLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundType {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "lower")]
    Lower,
    #[serde(rename = "upper")]
    Upper,
    #[serde(rename = "approximate")]
    Approximate,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal_violation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_nodes: Option<u64>,
}

/// A transport value together with how it was obtained and what kind of
/// bound it is. Constructors pin the method/bound pairing.
#[derive(Debug, Clone, Serialize)]
pub struct W1Result {
    pub value: f64,
    pub method: Method,
    pub bound_type: BoundType,
    pub diagnostics: Diagnostics,
}

impl W1Result {
    fn exact(value: f64, iterations: u64) -> Self {
        W1Result {
            value,
            method: Method::ExactDiscrete,
            bound_type: BoundType::Exact,
            diagnostics: Diagnostics { iterations: Some(iterations), ..Default::default() },
        }
    }

    fn entropic(value: f64, violation: f64, iterations: u64) -> Self {
        W1Result {
            value,
            method: Method::Entropic,
            bound_type: BoundType::Approximate,
            diagnostics: Diagnostics {
                iterations: Some(iterations),
                marginal_violation: Some(violation),
                ..Default::default()
            },
        }
    }

    fn kr_dual(value: f64, nodes: u64) -> Self {
        W1Result {
            value,
            method: Method::KrDual,
            bound_type: BoundType::Lower,
            diagnostics: Diagnostics { quadrature_nodes: Some(nodes), ..Default::default() },
        }
    }

    fn closed_form(value: f64) -> Self {
        W1Result {
            value,
            method: Method::ClosedFormLines,
            bound_type: BoundType::Exact,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn lifted_lower(value: f64) -> Self {
        W1Result {
            value,
            method: Method::LiftedLower,
            bound_type: BoundType::Lower,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialization cannot fail")
    }
}

/// Sparse coupling between two discrete measures.
#[derive(Debug, Clone, Serialize)]
pub struct TransportPlan {
    pub n_rows: usize,
    pub n_cols: usize,
    /// (row, col, mass) triplets with positive mass, sorted by (row, col).
    pub entries: Vec<(u32, u32, f64)>,
}

impl TransportPlan {
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let mut rows = vec![0.0; self.n_rows];
        let mut cols = vec![0.0; self.n_cols];
        for &(i, j, m) in &self.entries {
            rows[i as usize] += m;
            cols[j as usize] += m;
        }
        (rows, cols)
    }

    /// Sparse triplet CSV with header `i,j,mass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,mass")?;
        for &(i, j, m) in &self.entries {
            writeln!(w, "{i},{j},{m:.12e}")?;
        }
        Ok(())
    }
}

fn pair_cost<'a>(
    mu: &'a DiscreteMeasure,
    nu: &'a DiscreteMeasure,
) -> Result<impl Fn(usize, usize) -> f64 + 'a, TransportError> {
    if mu.space_tag != nu.space_tag {
        return Err(TransportError::SpaceTagMismatch);
    }
    if mu.is_empty() || nu.is_empty() {
        return Err(TransportError::EmptyMeasure);
    }
    if mu.dim() != nu.dim() {
        return Err(TransportError::Measure(MeasureError::DimensionMismatch(mu.dim(), nu.dim())));
    }
    let tangent = mu.space_tag == SpaceTag::Tangent;
    Ok(move |i: usize, j: usize| {
        let base = torus_distance_coords(mu.points[i].coords(), nu.points[j].coords());
        if tangent {
            let vi = &mu.velocities.as_ref().unwrap()[i];
            let vj = &nu.velocities.as_ref().unwrap()[j];
            let dv2: f64 = vi.iter().zip(vj).map(|(a, b)| (a - b) * (a - b)).sum();
            (base * base + dv2).sqrt()
        } else {
            base
        }
    })
}

/// Quantize probability weights to integer units summing exactly to
/// `MASS_SCALE`; the rounding residual lands on the heaviest atom.
fn quantize_weights(weights: &[f64]) -> Vec<u64> {
    let mut units: Vec<i64> = weights.iter().map(|&w| (w * MASS_SCALE).round() as i64).collect();
    let target = MASS_SCALE as i64;
    let sum: i64 = units.iter().sum();
    let heaviest = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    units[heaviest] += target - sum;
    assert!(units[heaviest] >= 0, "residual mass correction went negative");
    units.into_iter().map(|u| u as u64).collect()
}

/// Exact Kantorovich distance between discrete measures, solved as a
/// min-cost flow on the bipartite support graph with the torus metric
/// (or the lifted metric √(d(x,y)² + |u−v|²) on the tangent bundle).
pub fn w1_exact(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<(W1Result, TransportPlan), TransportError> {
    if mu.len() > EXACT_SUPPORT_LIMIT {
        return Err(TransportError::SizeExceeded(mu.len()));
    }
    if nu.len() > EXACT_SUPPORT_LIMIT {
        return Err(TransportError::SizeExceeded(nu.len()));
    }
    let cost = pair_cost(mu, nu)?;
    let supplies = quantize_weights(&mu.weights);
    let demands = quantize_weights(&nu.weights);
    let sol = mincost::solve_transport(mu.len(), nu.len(), &cost, &supplies, &demands);
    let mut value = 0.0;
    let mut entries = Vec::with_capacity(sol.flows.len());
    for &(i, j, units) in &sol.flows {
        let mass = units as f64 / MASS_SCALE;
        value += mass * cost(i as usize, j as usize);
        entries.push((i, j, mass));
    }
    let plan = TransportPlan { n_rows: mu.len(), n_cols: nu.len(), entries };
    let (rows, cols) = plan.marginals();
    let defect = rows
        .iter()
        .zip(&mu.weights)
        .chain(cols.iter().zip(&nu.weights))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if defect > 1e-9 {
        return Err(TransportError::MarginalMismatch(defect));
    }
    Ok((W1Result::exact(value, sol.augmentations), plan))
}

/// Cost of an arbitrary feasible plan against the same metric; used by the
/// sandwich checks (exact ≤ any feasible cost).
pub fn plan_cost(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    plan: &TransportPlan,
) -> Result<f64, TransportError> {
    let cost = pair_cost(mu, nu)?;
    Ok(plan.entries.iter().map(|&(i, j, m)| m * cost(i as usize, j as usize)).sum())
}

/// Entropically regularized transport cost (log-domain Sinkhorn with an
/// annealing warm start). Returns the plan cost ⟨P, C⟩ of the regularized
/// plan; fails if the L1 marginal violation stays above 1e-6 after
/// `max_iter` iterations at the target regularization.
pub fn w1_entropic(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    reg: f64,
    max_iter: u64,
) -> Result<W1Result, TransportError> {
    if !(reg > 0.0) {
        return Err(TransportError::BadRegularization(reg));
    }
    let cost_fn = pair_cost(mu, nu)?;
    let (n_rows, n_cols) = (mu.len(), nu.len());
    let mut cost = vec![0.0f64; n_rows * n_cols];
    for i in 0..n_rows {
        for j in 0..n_cols {
            cost[i * n_cols + j] = cost_fn(i, j);
        }
    }
    let out = sinkhorn::sinkhorn_log(&sinkhorn::SinkhornRun {
        cost: &cost,
        n_rows,
        n_cols,
        row_weights: &mu.weights,
        col_weights: &nu.weights,
        reg,
        max_iter,
        tol: 1e-6,
    });
    if out.violation > 1e-6 {
        return Err(TransportError::NotConverged { violation: out.violation, iterations: out.iterations });
    }
    Ok(W1Result::entropic(out.value, out.violation, out.iterations))
}

/// A 1-Lipschitz dual potential.
#[derive(Debug, Clone)]
pub enum Potential {
    /// x ↦ offset + d(x, anchor).
    Cone { anchor: TorusPoint, offset: f64 },
    /// x ↦ min_j (offset_j + d(x, anchor_j)).
    MinCone { anchors: Vec<(TorusPoint, f64)> },
    /// Distance to the nearest line of a family on 𝕋².
    DistToLines(LineFamilyMeasure),
    /// factor · inner(x); 1-Lipschitz only when |factor| ≤ 1, which the
    /// sampled check enforces at use time.
    Scaled { inner: Box<Potential>, factor: f64 },
}

impl Potential {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Potential::Cone { anchor, offset } => offset + torus_distance_coords(x, anchor.coords()),
            Potential::MinCone { anchors } => anchors
                .iter()
                .map(|(a, off)| off + torus_distance_coords(x, a.coords()))
                .fold(f64::INFINITY, f64::min),
            Potential::DistToLines(family) => strip_distance(x[0], x[1], family),
            Potential::Scaled { inner, factor } => factor * inner.eval(x),
        }
    }
}

/// Default cone family: one cone per (subsampled) support atom of each
/// measure plus the min-cone over the ν anchors.
pub fn default_cone_family(mu: &TorusMeasure, nu: &TorusMeasure, max_anchors: usize) -> Vec<Potential> {
    fn push_from(anchors: &mut Vec<TorusPoint>, m: &TorusMeasure, max_anchors: usize) {
        if let TorusMeasure::Discrete(d) = m {
            let stride = (d.len() / max_anchors.max(1)).max(1);
            for p in d.points.iter().step_by(stride).take(max_anchors) {
                anchors.push(p.clone());
            }
        }
    }
    let mut anchors = Vec::new();
    push_from(&mut anchors, mu, max_anchors);
    let before = anchors.len();
    push_from(&mut anchors, nu, max_anchors);
    let mut family: Vec<Potential> =
        anchors.iter().map(|a| Potential::Cone { anchor: a.clone(), offset: 0.0 }).collect();
    if anchors.len() > before {
        family.push(Potential::MinCone {
            anchors: anchors[before..].iter().map(|a| (a.clone(), 0.0)).collect(),
        });
    }
    family
}

fn integrate_potential(psi: &Potential, m: &TorusMeasure) -> (f64, u64) {
    match m {
        TorusMeasure::Discrete(d) => {
            let v = d
                .points
                .iter()
                .zip(&d.weights)
                .map(|(p, &w)| w * psi.eval(p.coords()))
                .sum();
            (v, d.len() as u64)
        }
        other => {
            let mut nodes = 0u64;
            let v = other.integrate(&|x: &[f64]| {
                psi.eval(x)
            });
            if let TorusMeasure::Grid(g) = other {
                nodes = g.masses.len() as u64;
            }
            (v, nodes)
        }
    }
}

/// Kantorovich–Rubinstein dual lower bound: the best |∫ψ dμ − ∫ψ dν| over
/// the supplied potential family. Every potential is soft-checked for the
/// 1-Lipschitz property on sampled pairs first.
pub fn w1_kr_dual(
    mu: &TorusMeasure,
    nu: &TorusMeasure,
    potentials: &[Potential],
) -> Result<W1Result, TransportError> {
    let dim = mu.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x4b52_4456);
    for (index, psi) in potentials.iter().enumerate() {
        for _ in 0..2048 {
            let a: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            let gap = (psi.eval(&a) - psi.eval(&b)).abs() - torus_distance_coords(&a, &b);
            if gap > 1e-6 {
                return Err(TransportError::LipschitzViolation { index, excess: gap });
            }
        }
    }
    let mut best = 0.0f64;
    let mut nodes = 0u64;
    for psi in potentials {
        let (a, na) = integrate_potential(psi, mu);
        let (b, nb) = integrate_potential(psi, nu);
        nodes = nodes.max(na).max(nb);
        best = best.max((a - b).abs());
    }
    Ok(W1Result::kr_dual(best, nodes))
}

/// Exact Wasserstein-1 distance between Lebesgue on 𝕋² and a line family.
///
/// The torus splits into q strips of perpendicular width d = 1/√(p²+q²)
/// and length 1/(q d). The 1-Lipschitz potential ψ = distance-to-nearest
/// -line integrates over each strip to (length)·d²/4, so
/// ∫ψ dLeb = q·(1/(qd))·d²/4 = d/4, a lower bound that the nearest-line
/// projection plan attains exactly. Hence W₁ = d/4 = 1/(4√(p²+q²)).
pub fn w1_lines_closed_form(family: &LineFamilyMeasure) -> W1Result {
    W1Result::closed_form(family.gap() / 4.0)
}

/// Certified lower bound for graph-lifted transport: if the base measures
/// are at least `base_w1` apart and the fields differ uniformly by
/// `field_gap`, then √(a² + b²) ≥ (a + b)/√2 gives the lifted bound.
pub fn w1_lifted_lower(base_w1: f64, field_gap: f64) -> f64 {
    assert!(base_w1 >= 0.0 && field_gap >= 0.0);
    (base_w1 + field_gap) / std::f64::consts::SQRT_2
}

/// Quadrature representation of Lebesgue measure for dual estimates.
pub fn lebesgue_grid(dim: usize, per_axis: usize) -> TorusMeasure {
    TorusMeasure::Grid(GridDensity::lebesgue(vec![per_axis; dim]))
}

/// ψ = distance to the nearest line, the optimal dual potential for
/// Lebesgue-vs-lines transport.
pub fn line_distance_potential(family: LineFamilyMeasure) -> Potential {
    Potential::DistToLines(family)
}
