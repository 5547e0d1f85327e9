//! Birkhoff time averages along linear torus flows and empirical
//! convergence-rate fits.

use crate::diophantine::Frequency;
use crate::linres::fourier::FourierSeries;
use crate::measures::TorusPoint;
use serde::Serialize;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ErgodicError {
    #[error("horizon must be positive (got {0})")]
    BadHorizon(f64),
    #[error("rate fit needs at least 3 usable points, found {0}")]
    Degenerate(usize),
    #[error("horizons must be strictly increasing")]
    BadHorizons,
    #[error("band {0} exceeds the supported maximum 32")]
    BandTooLarge(usize),
    #[error("invalid rate-case parameters: {0}")]
    BadCase(String),
}

/// Composite-Simpson time average (1/T)∫₀ᵀ F(x₀ + ωt) dt.
pub fn birkhoff_avg_linear(
    f: &dyn Fn(&[f64]) -> f64,
    omega: &Frequency,
    x0: &TorusPoint,
    horizon: f64,
) -> Result<f64, ErgodicError> {
    birkhoff_avg_linear_window(f, omega, x0, 0.0, horizon)
}

/// Time average over [t₀, t₁] of t ↦ F(x₀ + ωt); the shift identity
/// avg(x₀, [0,T]) = avg(x₀ + ωs, [−s, T−s]) holds exactly.
pub fn birkhoff_avg_linear_window(
    f: &dyn Fn(&[f64]) -> f64,
    omega: &Frequency,
    x0: &TorusPoint,
    t0: f64,
    t1: f64,
) -> Result<f64, ErgodicError> {
    if !(t1 > t0) {
        return Err(ErgodicError::BadHorizon(t1 - t0));
    }
    let span = t1 - t0;
    let speed: f64 = omega.components().iter().map(|c| c * c).sum::<f64>().sqrt();
    let max_step = 1e-3 * 1.0f64.max(1.0 / speed.max(1e-300));
    let mut intervals = (span / max_step).ceil() as usize;
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let intervals = intervals.max(2);
    let h = span / intervals as f64;
    let dim = omega.dim();
    let mut state = vec![0.0; dim];
    let eval_at = |t: f64, state: &mut Vec<f64>| -> f64 {
        for (j, s) in state.iter_mut().enumerate() {
            *s = x0.coords()[j] + omega.components()[j] * t;
        }
        f(state)
    };
    // Kahan-compensated accumulation: horizons up to 1e4 put 1e7 nodes in
    // the sum, where plain summation would lose ~1e-10.
    let mut acc = 0.0f64;
    let mut comp = 0.0f64;
    let mut add = |v: f64| {
        let y = v - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    };
    add(eval_at(t0, &mut state));
    add(eval_at(t1, &mut state));
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        add(w * eval_at(t0 + i as f64 * h, &mut state));
    }
    Ok(acc * h / (3.0 * span))
}

/// Horizon-indexed deviations of the empirical average from the space mean.
#[derive(Debug, Clone, Serialize)]
pub struct RateCurve {
    pub horizons: Vec<f64>,
    pub errors: Vec<f64>,
}

impl RateCurve {
    pub fn new(horizons: Vec<f64>, errors: Vec<f64>) -> Result<Self, ErgodicError> {
        if horizons.len() != errors.len() || horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ErgodicError::BadHorizons);
        }
        Ok(RateCurve { horizons, errors })
    }

    /// CSV columns `T,error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "T,error")?;
        for (t, e) in self.horizons.iter().zip(&self.errors) {
            writeln!(w, "{t:.12e},{e:.12e}")?;
        }
        Ok(())
    }
}

/// e(T) = |avg_T − ∫F| for a band-limited observable along the linear flow.
/// The space mean of a band-limited series is its center coefficient, so no
/// quadrature error enters the reference value.
pub fn birkhoff_rate_curve(
    series: &FourierSeries,
    omega: &Frequency,
    x0: &TorusPoint,
    horizons: &[f64],
) -> Result<RateCurve, ErgodicError> {
    if series.band() > 32 {
        return Err(ErgodicError::BandTooLarge(series.band()));
    }
    let mean = series.mean().re;
    let f = |x: &[f64]| series.eval(x);
    let mut errors = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let avg = birkhoff_avg_linear(&f, omega, x0, t)?;
        errors.push((avg - mean).abs());
    }
    RateCurve::new(horizons.to_vec(), errors)
}

/// Least-squares fit of log e against log T.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    /// Decay exponent: e(T) ≈ C·T^{−beta_hat}.
    pub beta_hat: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
}

/// Fit the decay exponent, ignoring error values at or below 1e-14 (they
/// carry no information at double precision).
pub fn fit_decay(curve: &RateCurve) -> Result<RateFit, ErgodicError> {
    let pts: Vec<(f64, f64)> = curve
        .horizons
        .iter()
        .zip(&curve.errors)
        .filter(|(_, &e)| e > 1e-14)
        .map(|(&t, &e)| (t.ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(ErgodicError::Degenerate(pts.len()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - (intercept + slope * p.0)).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateFit { beta_hat: -slope, log_intercept: intercept, r_squared })
}

/// Arithmetic regime of the frequency for the predicted decay exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateCase {
    /// ω Diophantine with exponent τ: predicted α/(τ+n).
    Diophantine,
    /// Algebraic non-resonant components: predicted α/(α+n−1+ε).
    Algebraic,
    /// Planar frequency with Diophantine exponent 1: predicted α/(α+1).
    ExponentOne,
}

/// Predicted upper-envelope decay exponent for C^{0,α} observables along a
/// non-resonant linear flow on 𝕋ⁿ.
pub fn predicted_decay_exponent(
    case: RateCase,
    alpha: f64,
    tau: f64,
    n: usize,
    eps: f64,
) -> Result<f64, ErgodicError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(ErgodicError::BadCase(format!("alpha must be in (0,1], got {alpha}")));
    }
    match case {
        RateCase::Diophantine => {
            if n < 2 || tau < n as f64 - 1.0 {
                return Err(ErgodicError::BadCase(format!("need n >= 2, tau >= n-1 (tau={tau}, n={n})")));
            }
            Ok(alpha / (tau + n as f64))
        }
        RateCase::Algebraic => {
            if n < 2 || !(eps > 0.0) {
                return Err(ErgodicError::BadCase(format!("need n >= 2 and eps > 0 (eps={eps})")));
            }
            Ok(alpha / (alpha + n as f64 - 1.0 + eps))
        }
        RateCase::ExponentOne => Ok(alpha / (alpha + 1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    const PHI: f64 = 1.618033988749894848204586834365638118;

    fn golden() -> Frequency {
        Frequency::with_check_band(vec![1.0, PHI - 1.0], 64).unwrap()
    }

    fn origin() -> TorusPoint {
        TorusPoint::new(vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn constant_observable_averages_to_one() {
        let f = |_: &[f64]| 1.0;
        for t in [0.5, 3.0, 100.0] {
            let avg = birkhoff_avg_linear(&f, &golden(), &origin(), t).unwrap();
            assert!((avg - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn cosine_vanishes_over_whole_periods() {
        let f = |x: &[f64]| (2.0 * std::f64::consts::PI * x[0]).cos();
        for k in [1.0, 7.0, 40.0] {
            let avg = birkhoff_avg_linear(&f, &golden(), &origin(), k).unwrap();
            assert!(avg.abs() < 1e-12, "T={k}: {avg}");
        }
    }

    #[test]
    fn diagonal_mode_matches_antiderivative_oracle() {
        // F = cos(2π(x₁+x₂)) along ω = (1, φ−1):
        // (1/T)∫₀ᵀ cos(2π(1+ν)t)dt = sin(2πT(1+ν))/(2πT(1+ν)).
        let nu = PHI - 1.0;
        let f = |x: &[f64]| (2.0 * std::f64::consts::PI * (x[0] + x[1])).cos();
        let t = 100.0;
        let avg = birkhoff_avg_linear(&f, &golden(), &origin(), t).unwrap();
        let freq = 1.0 + nu;
        let oracle = (2.0 * std::f64::consts::PI * t * freq).sin() / (2.0 * std::f64::consts::PI * t * freq);
        assert!((avg - oracle).abs() < 1e-6, "avg {avg} oracle {oracle}");
    }

    #[test]
    fn quadrature_step_halving_is_stable() {
        // Same average computed over [0,T] and as two half windows.
        let f = |x: &[f64]| (2.0 * std::f64::consts::PI * x[0]).cos() * (2.0 * std::f64::consts::PI * x[1]).sin();
        let omega = golden();
        let t = 503.0;
        let whole = birkhoff_avg_linear(&f, &omega, &origin(), t).unwrap();
        let first = birkhoff_avg_linear_window(&f, &omega, &origin(), 0.0, t / 2.0).unwrap();
        let second = birkhoff_avg_linear_window(&f, &omega, &origin(), t / 2.0, t).unwrap();
        assert!(((first + second) / 2.0 - whole).abs() < 1e-9);
    }

    #[test]
    fn translation_covariance() {
        let f = |x: &[f64]| (2.0 * std::f64::consts::PI * (x[0] + 2.0 * x[1])).cos();
        let omega = golden();
        let s = 7.3;
        let t = 41.0;
        let base = birkhoff_avg_linear(&f, &omega, &origin(), t).unwrap();
        let shifted_start = TorusPoint::new(
            origin()
                .coords()
                .iter()
                .zip(omega.components())
                .map(|(x, o)| x + o * s)
                .collect(),
        )
        .unwrap();
        let shifted = birkhoff_avg_linear_window(&f, &omega, &shifted_start, -s, t - s).unwrap();
        assert!((base - shifted).abs() < 1e-9);
    }

    #[test]
    fn zero_mean_curve_decays_and_pure_mean_is_flat() {
        let omega = golden();
        let f = FourierSeries::from_real_modes(2, 1, &[(vec![1, 0], Complex64::new(0.5, 0.0))]).unwrap();
        let horizons = [10.0, 31.0, 100.0, 310.0, 1000.0];
        let curve = birkhoff_rate_curve(&f, &omega, &origin(), &horizons).unwrap();
        // Analytic envelope: |avg| <= 1/(pi T) for this mode; allow slack.
        for (t, e) in curve.horizons.iter().zip(&curve.errors) {
            assert!(*e <= 1.0 / (2.0 * std::f64::consts::PI * t) * (1.0 + 1e-6) + 1e-12);
        }
        // A pure mean mode has identically zero error.
        let c = FourierSeries::from_real_modes(2, 1, &[(vec![0, 0], Complex64::new(0.4, 0.0))]).unwrap();
        let flat = birkhoff_rate_curve(&c, &omega, &origin(), &horizons).unwrap();
        assert!(flat.errors.iter().all(|e| *e < 1e-13));
    }

    #[test]
    fn fit_recovers_synthetic_exponents() {
        let ts: Vec<f64> = (1..=16).map(|i| 10.0 * 2f64.powi(i)).collect();
        let exact = RateCurve::new(ts.clone(), ts.iter().map(|t| 3.0 * t.powf(-0.5)).collect()).unwrap();
        let fit = fit_decay(&exact).unwrap();
        assert!((fit.beta_hat - 0.5).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let wobble =
            RateCurve::new(ts.clone(), ts.iter().map(|t| (2.0 + t.ln().cos()) / t).collect()).unwrap();
        let fit = fit_decay(&wobble).unwrap();
        assert!(fit.beta_hat > 0.9 && fit.beta_hat < 1.1, "beta {}", fit.beta_hat);

        let flat = RateCurve::new(ts.clone(), vec![0.25; ts.len()]).unwrap();
        let fit = fit_decay(&flat).unwrap();
        assert!(fit.beta_hat.abs() < 1e-12);
    }

    #[test]
    fn fit_reproducibility_and_degeneracy() {
        let ts: Vec<f64> = (1..=6).map(|i| 10.0f64 * i as f64).collect();
        let curve = RateCurve::new(ts.clone(), ts.iter().map(|t| t.powf(-0.7) * 1.3).collect()).unwrap();
        let a = fit_decay(&curve).unwrap();
        let b = fit_decay(&curve).unwrap();
        assert!((a.beta_hat - b.beta_hat).abs() < 1e-12);
        assert!((a.log_intercept - b.log_intercept).abs() < 1e-12);
        let degenerate = RateCurve::new(vec![1.0, 2.0, 3.0], vec![0.0, 1e-16, 0.0]).unwrap();
        assert!(matches!(fit_decay(&degenerate), Err(ErgodicError::Degenerate(_))));
    }

    #[test]
    fn predicted_exponent_cases() {
        assert!((predicted_decay_exponent(RateCase::Diophantine, 1.0, 1.0, 2, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((predicted_decay_exponent(RateCase::ExponentOne, 1.0, 0.0, 0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let alg = predicted_decay_exponent(RateCase::Algebraic, 1.0, 0.0, 2, 0.01).unwrap();
        assert!((alg - 1.0 / 2.01).abs() < 1e-12);
        assert!(predicted_decay_exponent(RateCase::Diophantine, 1.0, 0.5, 2, 0.0).is_err());
        assert!(predicted_decay_exponent(RateCase::Algebraic, 1.0, 0.0, 2, 0.0).is_err());
    }

    #[test]
    fn golden_envelope_beta_exceeds_prediction() {
        // Zero-mean band-limited observable along the golden flow: the
        // fitted decay must not be slower than the predicted envelope 1/3.
        let omega = golden();
        let f = FourierSeries::from_real_modes(
            2,
            1,
            &[
                (vec![1, 0], Complex64::new(0.5, 0.0)),
                (vec![1, 1], Complex64::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        let horizons: Vec<f64> = (0..10).map(|i| 10.0 * 10f64.powf(i as f64 / 4.5)).collect();
        let curve = birkhoff_rate_curve(&f, &omega, &origin(), &horizons).unwrap();
        let fit = fit_decay(&curve).unwrap();
        let predicted = predicted_decay_exponent(RateCase::Diophantine, 1.0, 1.0, 2, 0.0).unwrap();
        assert!(
            fit.beta_hat >= predicted - 0.05,
            "beta {} predicted {}",
            fit.beta_hat,
            predicted
        );
    }
}
