//! Band-limited Fourier series on 𝕋ⁿ and uniform-grid transforms.
//!
//! Convention: F(x) = Σ_k c_k e^{2πi⟨k,x⟩} over k ∈ ℤⁿ ∩ [−K,K]ⁿ, so every
//! derivative picks up a factor 2πi k_j. A series sampled on an N-per-axis
//! uniform grid with N ≥ 2K+1 is recovered exactly by the discrete transform.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("grid resolution {n} aliases band {band} (need n >= 2*band+1)")]
    Aliasing { n: usize, band: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mode index {0:?} outside band")]
    ModeOutsideBand(Vec<i64>),
    #[error("sample buffer has length {got}, expected {expected}")]
    BadSampleCount { expected: usize, got: usize },
    #[error("invalid series payload: {0}")]
    BadPayload(String),
}

/// Complex Fourier coefficients on the centered band ℤⁿ ∩ [−K,K]ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    dim: usize,
    band: usize,
    /// Row-major over (k_1+K, …, k_n+K), each axis of length 2K+1.
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn zero(dim: usize, band: usize) -> Self {
        let len = (2 * band + 1).pow(dim as u32);
        FourierSeries { dim, band, coeffs: vec![Complex64::new(0.0, 0.0); len] }
    }

    /// Series with the given modes set; conjugate modes are NOT added
    /// implicitly. See [`FourierSeries::from_real_modes`].
    pub fn from_modes(dim: usize, band: usize, modes: &[(Vec<i64>, Complex64)]) -> Result<Self, FourierError> {
        let mut s = Self::zero(dim, band);
        for (k, c) in modes {
            s.set(k, *c)?;
        }
        Ok(s)
    }

    /// Real-valued series: for each listed mode k with coefficient c, both
    /// c_k = c and c_{−k} = conj(c) are set (k = 0 must be real).
    pub fn from_real_modes(dim: usize, band: usize, modes: &[(Vec<i64>, Complex64)]) -> Result<Self, FourierError> {
        let mut s = Self::zero(dim, band);
        for (k, c) in modes {
            s.set(k, *c)?;
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            if neg != *k {
                s.set(&neg, c.conj())?;
            } else if c.im != 0.0 {
                return Err(FourierError::BadPayload("self-conjugate mode must be real".into()));
            }
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> usize {
        self.band
    }

    fn index(&self, k: &[i64]) -> Result<usize, FourierError> {
        if k.len() != self.dim {
            return Err(FourierError::DimensionMismatch { expected: self.dim, got: k.len() });
        }
        let w = 2 * self.band + 1;
        let mut idx = 0usize;
        for &kj in k {
            if kj.unsigned_abs() as usize > self.band {
                return Err(FourierError::ModeOutsideBand(k.to_vec()));
            }
            idx = idx * w + (kj + self.band as i64) as usize;
        }
        Ok(idx)
    }

    pub fn get(&self, k: &[i64]) -> Result<Complex64, FourierError> {
        Ok(self.coeffs[self.index(k)?])
    }

    pub fn set(&mut self, k: &[i64], c: Complex64) -> Result<(), FourierError> {
        let i = self.index(k)?;
        self.coeffs[i] = c;
        Ok(())
    }

    /// Mean over the torus, ∫F dx = c_0.
    pub fn mean(&self) -> Complex64 {
        let center: Vec<i64> = vec![0; self.dim];
        self.get(&center).expect("center mode always in band")
    }

    /// Iterate (k, c_k) over all modes, zero coefficients included.
    pub fn modes(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        let w = 2 * self.band + 1;
        let band = self.band as i64;
        let dim = self.dim;
        self.coeffs.iter().enumerate().map(move |(mut idx, &c)| {
            let mut k = vec![0i64; dim];
            for j in (0..dim).rev() {
                k[j] = (idx % w) as i64 - band;
                idx /= w;
            }
            (k, c)
        })
    }

    fn nonzero_modes(&self) -> Vec<(Vec<i64>, Complex64)> {
        self.modes().filter(|(_, c)| c.norm_sqr() != 0.0).collect()
    }

    /// Max deviation from Hermitian symmetry c_{−k} = conj(c_k).
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, c) in self.modes() {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            let cn = self.get(&neg).unwrap();
            worst = worst.max((cn - c.conj()).norm());
        }
        worst
    }

    /// Pointwise complex evaluation Σ c_k e^{2πi⟨k,x⟩}.
    pub fn eval_complex(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.dim, "evaluation point dimension mismatch");
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.modes() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
            acc += c * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase);
        }
        acc
    }

    /// Real part of the pointwise evaluation (the value of a real series).
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_complex(x).re
    }

    pub fn scaled(&self, s: f64) -> FourierSeries {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    pub fn add(&self, other: &FourierSeries) -> Result<FourierSeries, FourierError> {
        if other.dim != self.dim || other.band != self.band {
            return Err(FourierError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    /// Partial derivative ∂/∂x_j as a series: coefficient 2πi k_j c_k.
    pub fn derivative(&self, axis: usize) -> FourierSeries {
        assert!(axis < self.dim);
        let mut out = self.clone();
        let w = 2 * self.band + 1;
        let band = self.band as i64;
        for (mut idx, c) in out.coeffs.iter_mut().enumerate() {
            let mut k_axis = 0i64;
            for j in (0..self.dim).rev() {
                let kj = (idx % w) as i64 - band;
                if j == axis {
                    k_axis = kj;
                }
                idx /= w;
            }
            *c *= Complex64::new(0.0, 2.0 * std::f64::consts::PI * k_axis as f64);
        }
        out
    }

    /// Gradient as one series per axis.
    pub fn gradient(&self) -> Vec<FourierSeries> {
        (0..self.dim).map(|j| self.derivative(j)).collect()
    }

    /// Directional derivative ⟨ω, ∇F⟩ as a series: coefficient 2πi⟨k,ω⟩c_k.
    pub fn directional_derivative(&self, omega: &[f64]) -> FourierSeries {
        assert_eq!(omega.len(), self.dim);
        let mut out = self.clone();
        for (k, _) in self.modes().collect::<Vec<_>>() {
            let dot: f64 = k.iter().zip(omega).map(|(&kj, &oj)| kj as f64 * oj).sum();
            let i = out.index(&k).unwrap();
            out.coeffs[i] *= Complex64::new(0.0, 2.0 * std::f64::consts::PI * dot);
        }
        out
    }

    /// Values on the uniform grid x_j = j/n per axis, row-major, via FFT.
    /// Exact (to rounding) whenever n ≥ 2K+1.
    pub fn grid_values_complex(&self, n: usize) -> Result<Vec<Complex64>, FourierError> {
        if n < 2 * self.band + 1 {
            return Err(FourierError::Aliasing { n, band: self.band });
        }
        let shape = vec![n; self.dim];
        let total: usize = shape.iter().product();
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        // Scatter coefficients into wrapped bins: k mod n per axis.
        for (k, c) in self.nonzero_modes() {
            let mut idx = 0usize;
            for &kj in &k {
                let b = kj.rem_euclid(n as i64) as usize;
                idx = idx * n + b;
            }
            data[idx] += c;
        }
        // Unnormalized inverse FFT along every axis gives
        // F(j/n) = Σ_k c_k e^{2πi Σ k_j j/n}.
        fft_nd(&mut data, &shape, FftDirection::Inverse);
        Ok(data)
    }

    pub fn grid_values(&self, n: usize) -> Result<Vec<f64>, FourierError> {
        Ok(self.grid_values_complex(n)?.into_iter().map(|c| c.re).collect())
    }

    /// Recover a band-K series from samples on the uniform nᵈ grid.
    pub fn from_grid(dim: usize, band: usize, n: usize, samples: &[f64]) -> Result<Self, FourierError> {
        let complex: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_grid_complex(dim, band, n, &complex)
    }

    pub fn from_grid_complex(dim: usize, band: usize, n: usize, samples: &[Complex64]) -> Result<Self, FourierError> {
        if n < 2 * band + 1 {
            return Err(FourierError::Aliasing { n, band });
        }
        let total = n.pow(dim as u32);
        if samples.len() != total {
            return Err(FourierError::BadSampleCount { expected: total, got: samples.len() });
        }
        let shape = vec![n; dim];
        let mut data = samples.to_vec();
        fft_nd(&mut data, &shape, FftDirection::Forward);
        let norm = 1.0 / total as f64;
        let mut out = Self::zero(dim, band);
        let modes: Vec<Vec<i64>> = out.modes().map(|(k, _)| k).collect();
        for k in modes {
            let mut idx = 0usize;
            for &kj in &k {
                idx = idx * n + kj.rem_euclid(n as i64) as usize;
            }
            let i = out.index(&k).unwrap();
            out.coeffs[i] = data[idx] * norm;
        }
        Ok(out)
    }

    /// |Σ_k |c_k|² − mean |F|² on an exact grid| — zero for alias-free data.
    pub fn parseval_gap(&self, n: usize) -> Result<f64, FourierError> {
        let vals = self.grid_values_complex(n)?;
        let grid_energy: f64 = vals.iter().map(|c| c.norm_sqr()).sum::<f64>() / vals.len() as f64;
        let coeff_energy: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        Ok((grid_energy - coeff_energy).abs())
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<SeriesEntry> = self
            .nonzero_modes()
            .into_iter()
            .map(|(k, c)| SeriesEntry { k, re: c.re, im: c.im })
            .collect();
        serde_json::to_string_pretty(&SeriesPayload { n: self.dim, k: self.band, entries })
            .expect("series serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, FourierError> {
        let payload: SeriesPayload =
            serde_json::from_str(text).map_err(|e| FourierError::BadPayload(e.to_string()))?;
        if payload.n == 0 || payload.n > 8 {
            return Err(FourierError::BadPayload(format!("unsupported dimension {}", payload.n)));
        }
        if payload.k > 512 {
            return Err(FourierError::BadPayload(format!("band {} too large", payload.k)));
        }
        let mut s = Self::zero(payload.n, payload.k);
        for e in &payload.entries {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(FourierError::BadPayload("non-finite coefficient".into()));
            }
            s.set(&e.k, Complex64::new(e.re, e.im))?;
        }
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesEntry {
    k: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesPayload {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    entries: Vec<SeriesEntry>,
}

#[derive(Clone, Copy, PartialEq)]
enum FftDirection {
    Forward,
    Inverse,
}

/// In-place unnormalized n-dimensional FFT over a row-major array.
fn fft_nd(data: &mut [Complex64], shape: &[usize], dir: FftDirection) {
    let mut planner = FftPlanner::new();
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total);
    for (axis, &len) in shape.iter().enumerate() {
        if len == 1 {
            continue;
        }
        let fft = match dir {
            FftDirection::Forward => planner.plan_fft_forward(len),
            FftDirection::Inverse => planner.plan_fft_inverse(len),
        };
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut lane = vec![Complex64::new(0.0, 0.0); len];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * len * inner + i;
                for (j, v) in lane.iter_mut().enumerate() {
                    *v = data[base + j * inner];
                }
                fft.process(&mut lane);
                for (j, v) in lane.iter().enumerate() {
                    data[base + j * inner] = *v;
                }
            }
        }
    }
}

/// Discrete transform from uniform grid samples to a band-limited series.
pub fn dft_forward(samples: &[f64], dim: usize, n: usize, band: usize) -> Result<FourierSeries, FourierError> {
    FourierSeries::from_grid(dim, band, n, samples)
}

/// Evaluate a series on the uniform nᵈ grid.
pub fn dft_inverse(series: &FourierSeries, n: usize) -> Result<Vec<f64>, FourierError> {
    series.grid_values(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn constant_transforms_to_center_mode() {
        let samples = vec![1.0; 25];
        let s = dft_forward(&samples, 2, 5, 1).unwrap();
        for (k, c) in s.modes() {
            if k == vec![0, 0] {
                assert!((c.re - 1.0).abs() < 1e-12 && c.im.abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-13, "spurious mode {:?} = {}", k, c);
            }
        }
    }

    #[test]
    fn cosine_splits_into_conjugate_pair() {
        let n = 9;
        let mut samples = Vec::with_capacity(n * n);
        for i in 0..n {
            for _j in 0..n {
                samples.push((2.0 * std::f64::consts::PI * i as f64 / n as f64).cos());
            }
        }
        let s = dft_forward(&samples, 2, n, 2).unwrap();
        let plus = s.get(&[1, 0]).unwrap();
        let minus = s.get(&[-1, 0]).unwrap();
        assert!((plus.re - 0.5).abs() < 1e-12 && plus.im.abs() < 1e-12);
        assert!((minus.re - 0.5).abs() < 1e-12 && minus.im.abs() < 1e-12);
    }

    #[test]
    fn random_band8_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut modes = Vec::new();
        for k1 in -8i64..=8 {
            for k2 in -8i64..=8 {
                if (k1, k2) < (0, 0) || (k1 == 0 && k2 == 0) {
                    continue;
                }
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                modes.push((vec![k1, k2], c));
            }
        }
        let s = FourierSeries::from_real_modes(2, 8, &modes).unwrap();
        let n = 24;
        let grid = s.grid_values(n).unwrap();
        let back = dft_forward(&grid, 2, n, 8).unwrap();
        let worst = s
            .modes()
            .map(|(k, c)| (back.get(&k).unwrap() - c).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-12, "round trip defect {}", worst);
        assert!(s.parseval_gap(n).unwrap() < 1e-10);
    }

    #[test]
    fn aliasing_is_rejected() {
        assert!(matches!(
            dft_forward(&[0.0; 9], 2, 3, 2),
            Err(FourierError::Aliasing { .. })
        ));
        let s = FourierSeries::zero(2, 4);
        assert!(matches!(s.grid_values(5), Err(FourierError::Aliasing { .. })));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = FourierSeries::from_real_modes(
            2,
            2,
            &[(vec![1, 0], Complex64::new(0.3, -0.1)), (vec![2, 1], Complex64::new(-0.2, 0.05))],
        )
        .unwrap();
        let dx = s.derivative(0);
        let h = 1e-6;
        let x = [0.21, 0.57];
        let fd = (s.eval(&[x[0] + h, x[1]]) - s.eval(&[x[0] - h, x[1]])) / (2.0 * h);
        assert!((dx.eval(&x) - fd).abs() < 1e-6);
    }

    #[test]
    fn json_round_trip_preserves_modes() {
        let s = FourierSeries::from_real_modes(2, 3, &[(vec![1, -2], Complex64::new(0.25, 0.5))]).unwrap();
        let back = FourierSeries::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
    }
}
