//! First-order invariant-torus machinery in Fourier space: the
//! cohomological equation, the conjugacy generator, and the linear response
//! of the invariant measure to a potential perturbation.
//!
//! For H(p) quadratic near p = 0 with ∇H(0) = ω and Hessian A, the
//! perturbed Hamiltonian H + εf carries an invariant torus conjugate to the
//! rotation ω. To first order the data is:
//!
//! * u₁ solving ⟨ω, ∇u₁⟩ = [f] − f (zero mean, small divisors 2πi⟨k,ω⟩),
//! * c₁ making the conjugacy equation solvable (zero for quadratic H),
//! * the velocity correction W = A(∇u₁ + c₁),
//! * ψ₁ solving ⟨ω, ∇⟩ψ₁ = −W componentwise,
//! * the ergodic-constant slope α₁ = [f] + ⟨ω, c₁⟩.
//!
//! The response of ∫g d(measure) is then ∫[⟨∂₁g(x,ω), ψ₁⟩ + ⟨∂₂g(x,ω), W⟩]dx.

pub mod fourier;

use crate::diophantine::Frequency;
use fourier::{FourierError, FourierSeries};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Divisors |⟨k,ω⟩| at or below this threshold abort spectral solves.
pub const RESONANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LinresError {
    #[error("near-resonance: |<k,omega>| = {value:e} at k = {k:?}")]
    NearResonance { k: Vec<i64>, value: f64 },
    #[error("right-hand side must have zero mean (|mean| = {0:e})")]
    NonzeroMean(f64),
    #[error("Hessian is singular or not positive definite")]
    SingularHessian,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// Dense symmetric positive-definite n×n matrix (the momentum Hessian).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HessianMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl HessianMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        HessianMatrix { n, entries }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinresError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinresError::DimensionMismatch(n, 0));
        }
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            entries.extend_from_slice(r);
        }
        let m = HessianMatrix { n, entries };
        for i in 0..n {
            for j in 0..i {
                if (m.get(i, j) - m.get(j, i)).abs() > 1e-12 {
                    return Err(LinresError::SingularHessian);
                }
            }
        }
        if !m.is_positive_definite() {
            return Err(LinresError::SingularHessian);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Sylvester criterion on the leading principal minors.
    fn is_positive_definite(&self) -> bool {
        for k in 1..=self.n {
            if leading_minor(&self.entries, self.n, k) <= 0.0 {
                return false;
            }
        }
        true
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Solve A x = b by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinresError> {
        let n = self.n;
        if b.len() != n {
            return Err(LinresError::DimensionMismatch(n, b.len()));
        }
        let mut a = self.entries.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap())
                .unwrap();
            if a[pivot * n + col].abs() < 1e-14 {
                return Err(LinresError::SingularHessian);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                rhs.swap(col, pivot);
            }
            for row in col + 1..n {
                let factor = a[row * n + col] / a[col * n + col];
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = rhs[row];
            for j in row + 1..n {
                acc -= a[row * n + j] * x[j];
            }
            x[row] = acc / a[row * n + row];
        }
        Ok(x)
    }
}

fn leading_minor(entries: &[f64], n: usize, k: usize) -> f64 {
    let mut a: Vec<f64> = (0..k * k).map(|idx| entries[(idx / k) * n + idx % k]).collect();
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i * k + col].abs().partial_cmp(&a[j * k + col].abs()).unwrap())
            .unwrap();
        if a[pivot * k + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        det *= a[col * k + col];
        for row in col + 1..k {
            let factor = a[row * k + col] / a[col * k + col];
            for j in col..k {
                a[row * k + j] -= factor * a[col * k + j];
            }
        }
    }
    det
}

fn check_band_nonresonant(band: usize, dim: usize, omega: &Frequency) -> Result<(), LinresError> {
    if omega.dim() != dim {
        return Err(LinresError::DimensionMismatch(omega.dim(), dim));
    }
    let comps = omega.components();
    let probe = FourierSeries::zero(dim, band);
    let mut worst: Option<(Vec<i64>, f64)> = None;
    for (k, _) in probe.modes() {
        if k.iter().all(|&v| v == 0) {
            continue;
        }
        let dot: f64 = k.iter().zip(comps).map(|(&kj, &oj)| kj as f64 * oj).sum();
        if dot.abs() <= RESONANCE_FLOOR {
            match &worst {
                Some((_, w)) if *w <= dot.abs() => {}
                _ => worst = Some((k.clone(), dot.abs())),
            }
        }
    }
    match worst {
        Some((k, value)) => Err(LinresError::NearResonance { k, value }),
        None => Ok(()),
    }
}

/// Solve ⟨ω, ∇u⟩ = [f] − f in the band of f.
///
/// Coefficients: u_k = −f_k / (2πi⟨k,ω⟩) for k ≠ 0 and u_0 = 0, so that
/// the directional derivative reproduces [f] − f exactly mode by mode.
pub fn solve_cohomological(f: &FourierSeries, omega: &Frequency) -> Result<FourierSeries, LinresError> {
    check_band_nonresonant(f.band(), f.dim(), omega)?;
    let comps = omega.components();
    let mut u = FourierSeries::zero(f.dim(), f.band());
    for (k, c) in f.modes() {
        if k.iter().all(|&v| v == 0) || c.norm_sqr() == 0.0 {
            continue;
        }
        let dot: f64 = k.iter().zip(comps).map(|(&kj, &oj)| kj as f64 * oj).sum();
        let divisor = Complex64::new(0.0, 2.0 * std::f64::consts::PI * dot);
        u.set(&k, -c / divisor)?;
    }
    Ok(u)
}

/// Velocity correction W = A(∇u₁ + c₁) as one series per component. The
/// k = 0 coefficient of W is exactly A·c₁ because ∇u₁ has zero mean.
pub fn velocity_correction(
    u1: &FourierSeries,
    c1: &[f64],
    hessian: &HessianMatrix,
) -> Result<Vec<FourierSeries>, LinresError> {
    let n = u1.dim();
    if c1.len() != n || hessian.n() != n {
        return Err(LinresError::DimensionMismatch(n, c1.len()));
    }
    let grad = u1.gradient();
    let shift = hessian.mul_vec(c1);
    let zero_mode: Vec<i64> = vec![0; n];
    let mut out = Vec::with_capacity(n);
    for (i, &sh) in shift.iter().enumerate() {
        let mut w = FourierSeries::zero(n, u1.band());
        for (j, gj) in grad.iter().enumerate() {
            let a = hessian.get(i, j);
            if a != 0.0 {
                w = w.add(&gj.scaled(a))?;
            }
        }
        let mean = w.get(&zero_mode)?;
        w.set(&zero_mode, mean + Complex64::new(sh, 0.0))?;
        out.push(w);
    }
    Ok(out)
}

/// The constant c₁ making the first-order conjugacy solvable: it solves
/// A c₁ = −mean(A ∇u₁). Since ∇u₁ has exactly zero mean this is the zero
/// vector; the solve is kept explicit so a singular Hessian surfaces and
/// the degeneracy stays audited.
pub fn solve_c1_quadratic(hessian: &HessianMatrix, u1: &FourierSeries) -> Result<Vec<f64>, LinresError> {
    let n = u1.dim();
    if hessian.n() != n {
        return Err(LinresError::DimensionMismatch(hessian.n(), n));
    }
    let zero_mode: Vec<i64> = vec![0; n];
    let grad_means: Vec<f64> = u1.gradient().iter().map(|g| g.get(&zero_mode).unwrap().re).collect();
    let rhs: Vec<f64> = hessian.mul_vec(&grad_means).into_iter().map(|v| -v).collect();
    // +0.0 flushes negative zeros out of the solution.
    Ok(hessian.solve(&rhs)?.into_iter().map(|v| v + 0.0).collect())
}

/// Solve ⟨ω, ∇⟩ψ₁ = −W componentwise; each component must have zero mean.
pub fn solve_conjugacy(w: &[FourierSeries], omega: &Frequency) -> Result<Vec<FourierSeries>, LinresError> {
    let mut out = Vec::with_capacity(w.len());
    for comp in w {
        let mean = comp.mean().norm();
        if mean > 1e-10 {
            return Err(LinresError::NonzeroMean(mean));
        }
        // With zero mean, [W] − W = −W, so the cohomological solve yields
        // exactly ⟨ω,∇⟩ψ = −W.
        out.push(solve_cohomological(comp, omega)?);
    }
    Ok(out)
}

/// First-order slope of the ergodic constant: α₁ = [f] + ⟨ω, c₁⟩.
pub fn alpha_expansion(f: &FourierSeries, omega: &Frequency, c1: &[f64]) -> f64 {
    let dot: f64 = omega.components().iter().zip(c1).map(|(&o, &c)| o * c).sum();
    f.mean().re + dot
}

/// The full first-order expansion for one perturbation instance.
#[derive(Debug, Clone)]
pub struct ResponseExpansion {
    pub u1: FourierSeries,
    pub psi1: Vec<FourierSeries>,
    pub c1: Vec<f64>,
    pub alpha1: f64,
    pub hessian: HessianMatrix,
}

pub fn response_expansion(
    f: &FourierSeries,
    omega: &Frequency,
    hessian: &HessianMatrix,
) -> Result<ResponseExpansion, LinresError> {
    let u1 = solve_cohomological(f, omega)?;
    let c1 = solve_c1_quadratic(hessian, &u1)?;
    let w = velocity_correction(&u1, &c1, hessian)?;
    let psi1 = solve_conjugacy(&w, omega)?;
    Ok(ResponseExpansion {
        u1,
        psi1,
        c1: c1.clone(),
        alpha1: alpha_expansion(f, omega, &c1),
        hessian: hessian.clone(),
    })
}

/// A test observable g(x, v) with closed-form gradients.
pub trait Observable {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], v: &[f64]) -> f64;
    /// ∂g/∂x.
    fn grad_x(&self, x: &[f64], v: &[f64]) -> Vec<f64>;
    /// ∂g/∂v.
    fn grad_v(&self, x: &[f64], v: &[f64]) -> Vec<f64>;
}

/// g(x, v) = h(x) · (⟨b, v⟩ + c) with band-limited real h.
pub struct ModulatedVelocity {
    h: FourierSeries,
    grad_h: Vec<FourierSeries>,
    b: Vec<f64>,
    c: f64,
}

impl ModulatedVelocity {
    pub fn new(h: FourierSeries, b: Vec<f64>, c: f64) -> Result<Self, LinresError> {
        if b.len() != h.dim() {
            return Err(LinresError::DimensionMismatch(h.dim(), b.len()));
        }
        let grad_h = h.gradient();
        Ok(ModulatedVelocity { h, grad_h, b, c })
    }
}

impl Observable for ModulatedVelocity {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        let affine: f64 = self.b.iter().zip(v).map(|(&b, &vj)| b * vj).sum::<f64>() + self.c;
        self.h.eval(x) * affine
    }

    fn grad_x(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let affine: f64 = self.b.iter().zip(v).map(|(&b, &vj)| b * vj).sum::<f64>() + self.c;
        self.grad_h.iter().map(|g| g.eval(x) * affine).collect()
    }

    fn grad_v(&self, x: &[f64], _v: &[f64]) -> Vec<f64> {
        let hx = self.h.eval(x);
        self.b.iter().map(|&b| hx * b).collect()
    }
}

/// Sum of modulated-velocity terms.
pub struct ObservableSum(pub Vec<ModulatedVelocity>);

impl Observable for ObservableSum {
    fn dim(&self) -> usize {
        self.0.first().map(|o| o.dim()).unwrap_or(0)
    }

    fn eval(&self, x: &[f64], v: &[f64]) -> f64 {
        self.0.iter().map(|o| o.eval(x, v)).sum()
    }

    fn grad_x(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        for o in &self.0 {
            for (a, g) in acc.iter_mut().zip(o.grad_x(x, v)) {
                *a += g;
            }
        }
        acc
    }

    fn grad_v(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        for o in &self.0 {
            for (a, g) in acc.iter_mut().zip(o.grad_v(x, v)) {
                *a += g;
            }
        }
        acc
    }
}

fn quadrature_resolution(band: usize) -> usize {
    (4 * band).max(32)
}

fn grid_points(dim: usize, n: usize) -> Vec<Vec<f64>> {
    let total = n.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut x = vec![0.0; dim];
        for j in (0..dim).rev() {
            x[j] = (rem % n) as f64 / n as f64;
            rem /= n;
        }
        out.push(x);
    }
    out
}

/// The first-order response of ∫g d(invariant measure) to the perturbation
/// direction f, integrated against the unperturbed (Lebesgue) measure:
///
///   ∫ ⟨∂₁g(x,ω), ψ₁(x)⟩ + ⟨∂₂g(x,ω), A(∇u₁(x) + c₁)⟩ dx.
pub fn linear_response(
    g: &dyn Observable,
    f: &FourierSeries,
    omega: &Frequency,
    hessian: &HessianMatrix,
) -> Result<f64, LinresError> {
    let exp = response_expansion(f, omega, hessian)?;
    let dim = f.dim();
    let n = quadrature_resolution(f.band());
    let psi_grids: Vec<Vec<f64>> =
        exp.psi1.iter().map(|s| s.grid_values(n)).collect::<Result<_, _>>()?;
    let w = velocity_correction(&exp.u1, &exp.c1, hessian)?;
    let w_grids: Vec<Vec<f64>> = w.iter().map(|s| s.grid_values(n)).collect::<Result<_, _>>()?;
    let xs = grid_points(dim, n);
    let omega_v = omega.components();
    let mut acc = 0.0;
    for (idx, x) in xs.iter().enumerate() {
        let gx = g.grad_x(x, omega_v);
        let gv = g.grad_v(x, omega_v);
        let mut term = 0.0;
        for j in 0..dim {
            term += gx[j] * psi_grids[j][idx] + gv[j] * w_grids[j][idx];
        }
        acc += term;
    }
    Ok(acc / xs.len() as f64)
}

/// One-sided difference quotients of the measure pairing along the
/// first-order surrogate family: V_ε = ω + εW and ψ_ε = id + εψ₁, with the
/// perturbed measure realized as the ψ_ε-pushforward of Lebesgue,
///
///   D(ε) = [∫ g(ψ_ε(x), V_ε(ψ_ε(x))) dx − ∫ g(x, ω) dx] / ε.
pub fn finite_difference_response(
    g: &dyn Observable,
    f: &FourierSeries,
    omega: &Frequency,
    hessian: &HessianMatrix,
    eps_list: &[f64],
) -> Result<Vec<f64>, LinresError> {
    let exp = response_expansion(f, omega, hessian)?;
    let dim = f.dim();
    let n = quadrature_resolution(f.band()).max(64);
    let psi_grids: Vec<Vec<f64>> =
        exp.psi1.iter().map(|s| s.grid_values(n)).collect::<Result<_, _>>()?;
    let w = velocity_correction(&exp.u1, &exp.c1, hessian)?;
    let xs = grid_points(dim, n);
    let omega_v = omega.components();
    let base: f64 = xs.iter().map(|x| g.eval(x, omega_v)).sum::<f64>() / xs.len() as f64;
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut acc = 0.0;
        for (idx, x) in xs.iter().enumerate() {
            let px: Vec<f64> = (0..dim).map(|j| x[j] + eps * psi_grids[j][idx]).collect();
            let vel: Vec<f64> = (0..dim).map(|j| omega_v[j] + eps * w[j].eval(&px)).collect();
            acc += g.eval(&px, &vel);
        }
        let perturbed = acc / xs.len() as f64;
        out.push((perturbed - base) / eps);
    }
    Ok(out)
}

/// Polynomial (Neville) extrapolation of the ladder D(ε) to ε = 0.
pub fn richardson_extrapolate(eps: &[f64], values: &[f64]) -> f64 {
    assert_eq!(eps.len(), values.len());
    assert!(!eps.is_empty());
    let mut table = values.to_vec();
    let n = table.len();
    for level in 1..n {
        for i in 0..n - level {
            let x0 = eps[i];
            let x1 = eps[i + level];
            table[i] = (table[i + 1] * x0 - table[i] * x1) / (x0 - x1);
        }
    }
    table[0]
}

/// Serializable response report emitted by the lab experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ResponseReport {
    pub alpha1: f64,
    pub c1: Vec<f64>,
    pub response: f64,
    pub fd_ladder: Vec<FdSample>,
    pub richardson: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FdSample {
    pub eps: f64,
    #[serde(rename = "D")]
    pub d: f64,
}
