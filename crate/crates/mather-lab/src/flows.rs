//! Vector fields on 𝕋ⁿ, the quadratic Mañé action, RK4 integration with
//! torus wrapping, and Poincaré first-return maps.

use crate::linres::fourier::FourierSeries;
use crate::measures::{wrap_unit, TorusPoint};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("attracting perturbation requires 0 < delta <= 0.2 (got {0})")]
    BadDelta(f64),
    #[error("p and q must be coprime with q >= 1 (got p={p}, q={q})")]
    NotCoprime { p: i64, q: i64 },
    #[error("integration step must satisfy 0 < dt <= 1e-2 (got {0})")]
    StepTooLarge(f64),
    #[error("horizon must be positive (got {0})")]
    BadHorizon(f64),
    #[error("no section return within t <= {0}")]
    NoReturn(f64),
    #[error("Poincaré section requires the first velocity component >= 1/2 (found {0})")]
    SectionNotTransverse(f64),
    #[error("Poincaré map requires dimension 2, got {0}")]
    NotPlanar(usize),
}

/// The vector-field family flowed by the experiments.
#[derive(Debug, Clone)]
pub enum VectorField {
    /// V(x) = ω.
    Constant(Vec<f64>),
    /// V(x) = (1, p/q) on 𝕋².
    RationalConstant { p: i64, q: i64 },
    /// V(x,y) = (1, p/q + δ·g) with g = −sin(2πs) in the strip coordinate
    /// s = q(y − (p/q)x) mod 1. g vanishes on every line (s = 0) and
    /// midline (s = 1/2); each line attracts at transverse rate −2πqδ.
    Attracting { p: i64, q: i64, delta: f64 },
    /// Each component evaluated from a real band-limited series.
    Fourier { components: Vec<FourierSeries> },
}

impl VectorField {
    pub fn dim(&self) -> usize {
        match self {
            VectorField::Constant(omega) => omega.len(),
            VectorField::RationalConstant { .. } | VectorField::Attracting { .. } => 2,
            VectorField::Fourier { components } => components.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            VectorField::Constant(omega) => omega.clone(),
            VectorField::RationalConstant { p, q } => vec![1.0, *p as f64 / *q as f64],
            VectorField::Attracting { p, q, delta } => {
                let slope = *p as f64 / *q as f64;
                let s = wrap_unit(*q as f64 * (x[1] - slope * x[0]));
                let g = -(2.0 * std::f64::consts::PI * s).sin();
                vec![1.0, slope + delta * g]
            }
            VectorField::Fourier { components } => components.iter().map(|c| c.eval(x)).collect(),
        }
    }
}

/// Attracting perturbation of the rational flow: every line of the
/// family becomes a transversally stable invariant curve.
pub fn attracting_field(p: i64, q: i64, delta: f64) -> Result<VectorField, FlowError> {
    if q < 1 || num_integer::gcd(p, q) != 1 {
        return Err(FlowError::NotCoprime { p, q });
    }
    if !(delta > 0.0 && delta <= 0.2) {
        return Err(FlowError::BadDelta(delta));
    }
    Ok(VectorField::Attracting { p, q, delta })
}

/// Quadratic action density ½|v − V(x)|²; zero exactly on the graph of V.
pub fn mane_action(x: &TorusPoint, v: &[f64], field: &VectorField) -> Result<f64, FlowError> {
    if x.dim() != field.dim() || v.len() != field.dim() {
        return Err(FlowError::DimensionMismatch(x.dim(), v.len()));
    }
    let vx = field.eval(x.coords());
    Ok(0.5 * v.iter().zip(&vx).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// A sampled integral curve: uniform time grid, wrapped positions, and the
/// field evaluated at each sample.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    points: Vec<TorusPoint>,
    velocities: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn velocities(&self) -> &[Vec<f64>] {
        &self.velocities
    }

    pub fn terminal(&self) -> &TorusPoint {
        self.points.last().expect("trajectory has at least the initial sample")
    }

    /// CSV columns t, x_1..x_n, v_1..v_n.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.points.first().map(|p| p.dim()).unwrap_or(0);
        let mut header = String::from("t");
        for j in 1..=n {
            header.push_str(&format!(",x{j}"));
        }
        for j in 1..=n {
            header.push_str(&format!(",v{j}"));
        }
        writeln!(w, "{header}")?;
        for i in 0..self.len() {
            let mut line = format!("{:.12e}", self.times[i]);
            for c in self.points[i].coords() {
                line.push_str(&format!(",{c:.12e}"));
            }
            for c in &self.velocities[i] {
                line.push_str(&format!(",{c:.12e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn rk4_step(field: &VectorField, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let k1 = field.eval(x);
    let mut stage = vec![0.0; n];
    for i in 0..n {
        stage[i] = x[i] + 0.5 * h * k1[i];
    }
    let k2 = field.eval(&stage);
    for i in 0..n {
        stage[i] = x[i] + 0.5 * h * k2[i];
    }
    let k3 = field.eval(&stage);
    for i in 0..n {
        stage[i] = x[i] + h * k3[i];
    }
    let k4 = field.eval(&stage);
    (0..n)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Classical RK4 with coordinates wrapped mod 1 after every step. The
/// requested `dt` is shrunk so the horizon divides into whole steps.
pub fn integrate(field: &VectorField, x0: &TorusPoint, horizon: f64, dt: f64) -> Result<Trajectory, FlowError> {
    if !(horizon > 0.0) {
        return Err(FlowError::BadHorizon(horizon));
    }
    if !(dt > 0.0 && dt <= 1e-2) {
        return Err(FlowError::StepTooLarge(dt));
    }
    if x0.dim() != field.dim() {
        return Err(FlowError::DimensionMismatch(x0.dim(), field.dim()));
    }
    let steps = (horizon / dt).ceil() as usize;
    let h = horizon / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    let mut velocities = Vec::with_capacity(steps + 1);
    let mut x = x0.coords().to_vec();
    times.push(0.0);
    velocities.push(field.eval(&x));
    points.push(x0.clone());
    for step in 1..=steps {
        x = rk4_step(field, &x, h);
        for c in &mut x {
            *c = wrap_unit(*c);
        }
        times.push(step as f64 * h);
        velocities.push(field.eval(&x));
        points.push(TorusPoint::new(x.clone()).expect("finite state"));
    }
    Ok(Trajectory { times, points, velocities })
}

const POINCARE_T_MAX: f64 = 1e3;

/// First return of the flow to the section {x₁ = 0 mod 1}, reported as the
/// y-coordinate of the crossing. Rational and constant fields short-circuit
/// to the rigid rotation y ↦ y + ω₂/ω₁; other fields integrate with the
/// crossing bracketed and bisected to 1e-10.
pub fn poincare_map(field: &VectorField, y0: f64) -> Result<f64, FlowError> {
    if field.dim() != 2 {
        return Err(FlowError::NotPlanar(field.dim()));
    }
    match field {
        VectorField::RationalConstant { p, q } => Ok(wrap_unit(y0 + *p as f64 / *q as f64)),
        VectorField::Constant(omega) => {
            if omega[0] < 0.5 {
                return Err(FlowError::SectionNotTransverse(omega[0]));
            }
            Ok(wrap_unit(y0 + omega[1] / omega[0]))
        }
        _ => {
            // Soft transversality check on a coarse grid.
            let mut min_v1 = f64::INFINITY;
            for i in 0..32 {
                for j in 0..32 {
                    let v = field.eval(&[i as f64 / 32.0, j as f64 / 32.0]);
                    min_v1 = min_v1.min(v[0]);
                }
            }
            if min_v1 < 0.5 {
                return Err(FlowError::SectionNotTransverse(min_v1));
            }
            // Integrate in the universal cover of the first coordinate.
            let mut state = vec![0.0f64, y0];
            let h = 1e-3;
            let mut t = 0.0;
            while t < POINCARE_T_MAX {
                let next = rk4_step(field, &state, h);
                if next[0] >= 1.0 {
                    // Bisect the step length until the crossing is pinned.
                    let mut lo = 0.0f64;
                    let mut hi = h;
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        let probe = rk4_step(field, &state, mid);
                        if probe[0] >= 1.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                        if hi - lo < 1e-14 {
                            break;
                        }
                    }
                    let hit = rk4_step(field, &state, 0.5 * (lo + hi));
                    debug_assert!((hit[0] - 1.0).abs() < 1e-10);
                    return Ok(wrap_unit(hit[1]));
                }
                state = next;
                t += h;
            }
            Err(FlowError::NoReturn(POINCARE_T_MAX))
        }
    }
}
