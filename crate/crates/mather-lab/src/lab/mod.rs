//! Experiment orchestration: the scaling sweeps, the Birkhoff-rate run, and
//! the linear-response run, with JSON/CSV/SVG emission and verdicts.

pub mod config;
pub mod report;
pub mod svg;

use crate::diophantine::{
    continued_fraction, convergents, simultaneous_schedule, verify_diophantine, DiophantineError,
    Frequency, RationalApprox,
};
use crate::ergodic::{
    birkhoff_rate_curve, fit_decay, predicted_decay_exponent, ErgodicError, RateCase,
};
use crate::flows::{attracting_field, integrate, FlowError, VectorField};
use crate::lab::config::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::lab::report::{
    fit_rows, verdict_closed_form_identity, verdict_cross_method_sandwich, verdict_envelope,
    verdict_exponent, verdict_schedule_sandwich, BirkhoffReport, ExponentFit, LabReport,
    PredictedExponent, ReportRow, ResponseReportDoc, ScalingReport, ScheduleRow, Verdict,
};
use crate::linres::fourier::FourierSeries;
use crate::linres::{
    finite_difference_response, linear_response, response_expansion, richardson_extrapolate,
    FdSample, HessianMatrix, LinresError, ModulatedVelocity, ResponseReport,
};
use crate::measures::{
    empirical_from_trajectory, kronecker_cloud, DiscreteMeasure, GridDensity, LineFamilyMeasure,
    MeasureError, TorusMeasure, TorusPoint,
};
use crate::transport::{
    default_cone_family, w1_entropic, w1_exact, w1_lifted_lower, w1_lines_closed_form, Potential,
    TransportError,
};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Ergodic(#[from] ErgodicError),
    #[error(transparent)]
    Linres(#[from] LinresError),
    #[error("experiment requires {0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn build_frequency(cfg: &ExperimentConfig) -> Result<Frequency, LabError> {
    let fc = &cfg.frequency;
    let f = match (fc.sigma, fc.tau) {
        (Some(s), Some(t)) => Frequency::with_claimed(fc.components.clone(), s, t, fc.check_band)?,
        _ => Frequency::with_check_band(fc.components.clone(), fc.check_band)?,
    };
    Ok(f)
}

/// Convergents of ν for the configured index range, rejecting rational
/// terminations inside the range.
fn convergent_window(nu: f64, min: usize, max: usize) -> Result<Vec<(usize, RationalApprox)>, LabError> {
    let cf = continued_fraction(nu, (max + 1).min(64))?;
    if cf.depth() < max + 1 {
        return Err(LabError::Diophantine(DiophantineError::RationalDetected { m: cf.depth() as u64 }));
    }
    let conv = convergents(&cf, max + 1)?;
    Ok((min..=max).map(|m| (m, conv[m])).collect())
}

/// Pooled attractor empirical measure: `starts` trajectories of the
/// attracting field, sampled post burn-in at a golden-spaced interval that
/// stays incommensurate with the orbit period, trimmed to `target` atoms.
#[allow(clippy::too_many_arguments)]
pub fn attractor_empirical_measure(
    p: i64,
    q: i64,
    delta: f64,
    starts: usize,
    t_final: f64,
    burn_in: f64,
    dt: f64,
    target: usize,
    seed: u64,
) -> Result<DiscreteMeasure, LabError> {
    let field = attracting_field(p, q, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Orbit period along x is q; a golden multiple of q keeps consecutive
    // samples equidistributing along the attractor.
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let span = t_final - burn_in;
    let per_start = (target / starts.max(1)).max(8);
    let mut interval = span / per_start as f64;
    let base = q as f64;
    interval = base * ((interval / base).floor().max(1.0) + golden);
    let mut points = Vec::new();
    for _ in 0..starts {
        let x0 = TorusPoint::new(vec![rng.gen::<f64>(), rng.gen::<f64>()])?;
        let traj = integrate(&field, &x0, t_final, dt)?;
        let mut t_next = burn_in + interval;
        for (i, &t) in traj.times().iter().enumerate() {
            if t >= t_next {
                points.push(traj.points()[i].clone());
                t_next += interval;
            }
        }
    }
    if points.is_empty() {
        return Err(LabError::Measure(MeasureError::EmptyWindow));
    }
    Ok(DiscreteMeasure::uniform(points)?)
}

/// Fixed unit-sup perturbation direction for the upper-bound sweep:
/// u(x) = (sin 2π(x₁+x₂), cos 2πx₁)/√2.
fn upper_bound_field(omega: &Frequency, delta: f64) -> VectorField {
    let s = delta / std::f64::consts::SQRT_2;
    // sin θ = (e^{iθ} − e^{−iθ})/(2i): coefficient at +k is −i/2.
    let mut comp1 = FourierSeries::from_real_modes(
        2,
        1,
        &[(vec![1, 1], Complex64::new(0.0, -0.5 * s))],
    )
    .expect("valid modes");
    comp1
        .set(&[0, 0], Complex64::new(omega.components()[0], 0.0))
        .expect("center mode");
    let mut comp2 =
        FourierSeries::from_real_modes(2, 1, &[(vec![1, 0], Complex64::new(0.5 * s, 0.0))])
            .expect("valid modes");
    comp2
        .set(&[0, 0], Complex64::new(omega.components()[1], 0.0))
        .expect("center mode");
    VectorField::Fourier { components: vec![comp1, comp2] }
}

/// Amplitude sweep of the perturbed flow against Lebesgue, with the
/// entropic value per δ cross-checked by a dual lower bound and an exact
/// solve on subsampled supports.
pub fn run_upper_bound(cfg: &ExperimentConfig) -> Result<ScalingReport, LabError> {
    let omega = build_frequency(cfg)?;
    if omega.dim() != 2 {
        return Err(LabError::Unsupported("upper-bound needs a planar frequency".into()));
    }
    let n = omega.dim();
    let tau = cfg.frequency.tau.unwrap_or((n - 1) as f64);
    // Diophantine screen at the configured band; claims were verified at
    // construction, otherwise record the measured margin.
    let witness = verify_diophantine(&omega, cfg.frequency.sigma.unwrap_or(1e-9), tau, cfg.frequency.check_band)?;
    if !witness.ok {
        return Err(LabError::Unsupported(format!(
            "frequency margin {:.3e} too small at band {}",
            witness.margin, cfg.frequency.check_band
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let grid = GridDensity::lebesgue(vec![cfg.transport.grid; 2]);
    let grid_cloud = grid.to_discrete();
    let mut rows = Vec::new();
    for &delta in &cfg.perturbation.delta_grid {
        let field = upper_bound_field(&omega, delta);
        let x0 = TorusPoint::new(vec![rng.gen::<f64>(), rng.gen::<f64>()])?;
        let traj = integrate(&field, &x0, cfg.simulation.t_final, cfg.simulation.dt)?;
        let empirical = empirical_from_trajectory(&traj, cfg.simulation.burn_in)?;
        // Position-only cloud, thinned to the configured size.
        let stride = (empirical.len() / cfg.transport.cloud_size).max(1);
        let points: Vec<TorusPoint> =
            empirical.points.iter().step_by(stride).take(cfg.transport.cloud_size).cloned().collect();
        let cloud = DiscreteMeasure::uniform(points)?;

        let entropic = w1_entropic(&cloud, &grid_cloud, cfg.transport.reg, cfg.transport.max_iter)?;
        rows.push(ReportRow {
            param: delta,
            p: None,
            q: None,
            w1: entropic.value,
            method: entropic.method,
            bound_type: entropic.bound_type,
        });

        let family = default_cone_family(
            &TorusMeasure::Discrete(cloud.clone()),
            &TorusMeasure::Discrete(grid_cloud.clone()),
            12,
        );
        let dual = crate::transport::w1_kr_dual(
            &TorusMeasure::Discrete(cloud.clone()),
            &TorusMeasure::Grid(grid.clone()),
            &family,
        )?;
        rows.push(ReportRow {
            param: delta,
            p: None,
            q: None,
            w1: dual.value,
            method: dual.method,
            bound_type: dual.bound_type,
        });

        let sub = cfg.transport.exact_subsample.min(cloud.len());
        let sub_stride = (cloud.len() / sub).max(1);
        let sub_cloud = DiscreteMeasure::uniform(
            cloud.points.iter().step_by(sub_stride).take(sub).cloned().collect(),
        )?;
        let reference = kronecker_cloud(sub, 2);
        let (exact, _) = w1_exact(&sub_cloud, &reference)?;
        rows.push(ReportRow {
            param: delta,
            p: None,
            q: None,
            w1: exact.value,
            method: exact.method,
            bound_type: exact.bound_type,
        });
    }
    let fit = fit_rows(&rows, crate::transport::Method::Entropic);
    let l = 1.0 / (1.0 + tau + n as f64);
    let predicted_exponents = vec![PredictedExponent {
        value: l,
        provenance: format!("envelope exponent 1/(1+tau+n) with tau={tau}, n={n}"),
    }];
    let verdicts = vec![
        verdict_envelope(&rows, crate::transport::Method::Entropic, l, 0.05),
        verdict_cross_method_sandwich(&rows),
    ];
    Ok(ScalingReport {
        experiment: ExperimentKind::UpperBound.name().to_string(),
        seed: cfg.seed,
        dimension: n,
        rows,
        fit,
        predicted_exponents,
        schedules: Vec::new(),
        verdicts,
    })
}

/// Convergent sweep on 𝕋²: closed-form transport per line family, the
/// lifted lower bound, and (optionally) the attractor-empirical route.
pub fn run_lower_bound_2d(cfg: &ExperimentConfig) -> Result<ScalingReport, LabError> {
    let omega = build_frequency(cfg)?;
    if omega.dim() != 2 || omega.components()[0] != 1.0 {
        return Err(LabError::Unsupported("lower-bound-2d needs omega = (1, nu)".into()));
    }
    let nu = omega.components()[1];
    let window =
        convergent_window(nu, cfg.perturbation.convergent_min, cfg.perturbation.convergent_max)?;
    let mut rows = Vec::new();
    for &(_m, approx) in &window {
        let (p, q) = (approx.p, approx.q);
        let delta = approx.err;
        let family = LineFamilyMeasure::new(p, q)?;
        let closed = w1_lines_closed_form(&family);
        rows.push(ReportRow {
            param: delta,
            p: Some(p),
            q: Some(q),
            w1: closed.value,
            method: closed.method,
            bound_type: closed.bound_type,
        });
        let lifted = w1_lifted_lower(closed.value, delta);
        rows.push(ReportRow {
            param: delta,
            p: Some(p),
            q: Some(q),
            w1: lifted,
            method: crate::transport::Method::LiftedLower,
            bound_type: crate::transport::BoundType::Lower,
        });
        if cfg.perturbation.empirical_rows {
            let pooled = attractor_empirical_measure(
                p,
                q,
                cfg.perturbation.attractor_delta,
                cfg.simulation.starts,
                cfg.simulation.t_final,
                cfg.simulation.burn_in,
                cfg.simulation.dt,
                cfg.transport.cloud_size,
                cfg.seed,
            )?;
            let samples = family.sample_points(cfg.transport.samples_per_line, 0.5);
            let emp = w1_entropic(&pooled, &samples, cfg.transport.reg, cfg.transport.max_iter)?;
            rows.push(ReportRow {
                param: delta,
                p: Some(p),
                q: Some(q),
                w1: emp.value,
                method: emp.method,
                bound_type: emp.bound_type,
            });
        }
    }
    let fit = fit_rows(&rows, crate::transport::Method::ClosedFormLines);
    let r = cfg.perturbation.r;
    let predicted_exponents = vec![
        PredictedExponent {
            value: 1.0 / (r + 1.0),
            provenance: format!(
                "perpendicular-gap value d/4 = 1/(4 sqrt(p^2+q^2)) scales like 1/q, so W1 ~ delta^(1/(r+1)) with r={r}"
            ),
        },
        PredictedExponent {
            value: 2.0 / (r + 1.0),
            provenance: format!(
                "strip cross-section d^2/4 = 1/(4(p^2+q^2)) would scale like 1/q^2, giving delta^(2/(r+1)) with r={r}; kept for comparison, the transport solvers side with d/4"
            ),
        },
    ];
    let verdicts = vec![
        verdict_closed_form_identity(&rows),
        verdict_exponent("exponent-matches-gap-prediction", fit.as_ref(), 1.0 / (r + 1.0), 0.05),
        verdict_cross_method_sandwich(&rows),
    ];
    Ok(ScalingReport {
        experiment: ExperimentKind::LowerBound2d.name().to_string(),
        seed: cfg.seed,
        dimension: 2,
        rows,
        fit,
        predicted_exponents,
        schedules: Vec::new(),
        verdicts,
    })
}

/// Simultaneous-approximation sweep for ω = (ω₁,…,ω_{n−1},1): the perturbed
/// flow closes up after T_m, and the dual lower bound against Lebesgue is
/// evaluated with a nearest-orbit distance potential.
pub fn run_highdim_lower(cfg: &ExperimentConfig) -> Result<ScalingReport, LabError> {
    let omega = build_frequency(cfg)?;
    let n = omega.dim();
    if n < 2 {
        return Err(LabError::Unsupported("highdim-lower needs dimension >= 2".into()));
    }
    let mut rows = Vec::new();
    let mut schedules = Vec::new();
    for m in cfg.perturbation.convergent_min..=cfg.perturbation.convergent_max {
        let schedule = simultaneous_schedule(&omega, m)?;
        schedules.push(ScheduleRow {
            m,
            t_m: schedule.t_m,
            q_m: schedule.q_m,
            delta_m: schedule.delta_m,
        });
        // The perturbed constant field (p₁/q₁, …, p_{n−1}/q_{n−1}, 1).
        let mut velocity: Vec<f64> =
            schedule.per_component.iter().map(|r| r.ratio()).collect();
        velocity.push(1.0);
        // Uniform time sampling of the closed orbit through the origin.
        let period = schedule.t_m as f64;
        let count = ((schedule.t_m as usize) * 64).clamp(512, 4096);
        let orbit: Vec<TorusPoint> = (0..count)
            .map(|s| {
                let t = (s as f64 + 0.5) * period / count as f64;
                TorusPoint::new(velocity.iter().map(|v| v * t).collect()).expect("finite orbit point")
            })
            .collect();
        // Nearest-orbit potential from a subsample of anchors.
        let stride = (orbit.len() / 256).max(1);
        let anchors: Vec<(TorusPoint, f64)> =
            orbit.iter().step_by(stride).map(|p| (p.clone(), 0.0)).collect();
        let psi = Potential::MinCone { anchors };
        let per_axis = if n == 2 { cfg.transport.grid } else { cfg.transport.grid.min(24) };
        let leb = TorusMeasure::Grid(GridDensity::lebesgue(vec![per_axis; n]));
        let orbit_measure = TorusMeasure::Discrete(DiscreteMeasure::uniform(orbit)?);
        let dual = crate::transport::w1_kr_dual(&leb, &orbit_measure, &[psi])?;
        rows.push(ReportRow {
            param: schedule.delta_m,
            p: None,
            q: Some(schedule.q_m as i64),
            w1: dual.value,
            method: dual.method,
            bound_type: dual.bound_type,
        });
        if n == 2 {
            // Degenerate cross-path: the orbit of ((p/q), 1) is the mirror
            // line family, with the same perpendicular gap.
            let r = &schedule.per_component[0];
            let family = LineFamilyMeasure::new(r.p, r.q)?;
            let closed = w1_lines_closed_form(&family);
            rows.push(ReportRow {
                param: schedule.delta_m,
                p: Some(r.p),
                q: Some(r.q),
                w1: closed.value,
                method: closed.method,
                bound_type: closed.bound_type,
            });
        }
    }
    let fit = fit_rows(&rows, crate::transport::Method::KrDual);
    let predicted_exponents = vec![PredictedExponent {
        value: 0.5,
        provenance: "delta_m ~ Q_m^{-2} along exponent-1 components gives W1 >= C delta_m^{1/2}".to_string(),
    }];
    let min_dual = rows
        .iter()
        .filter(|r| r.method == crate::transport::Method::KrDual)
        .map(|r| r.w1)
        .fold(f64::INFINITY, f64::min);
    let verdicts = vec![
        verdict_schedule_sandwich(&schedules, n),
        Verdict::new(
            "dual-lower-positive",
            min_dual > 0.0,
            min_dual,
            0.0,
            "every dual lower bound is strictly positive".to_string(),
        ),
        verdict_cross_method_sandwich(&rows),
    ];
    Ok(ScalingReport {
        experiment: ExperimentKind::HighdimLower.name().to_string(),
        seed: cfg.seed,
        dimension: n,
        rows,
        fit,
        predicted_exponents,
        schedules,
        verdicts,
    })
}

/// Birkhoff-rate experiment for F = cos(2πx₁) + cos(2π(x₁+x₂)) along the
/// configured frequency.
pub fn run_birkhoff(cfg: &ExperimentConfig) -> Result<BirkhoffReport, LabError> {
    let omega = build_frequency(cfg)?;
    if omega.dim() != 2 {
        return Err(LabError::Unsupported("birkhoff experiment fixes a planar observable".into()));
    }
    let observable = FourierSeries::from_real_modes(
        2,
        1,
        &[
            (vec![1, 0], Complex64::new(0.5, 0.0)),
            (vec![1, 1], Complex64::new(0.5, 0.0)),
        ],
    )
    .expect("valid modes");
    let bc = &cfg.birkhoff;
    let ratio = bc.horizon_max / bc.horizon_min;
    let horizons: Vec<f64> = (0..bc.horizon_count)
        .map(|i| bc.horizon_min * ratio.powf(i as f64 / (bc.horizon_count - 1) as f64))
        .collect();
    let x0 = TorusPoint::new(vec![0.0, 0.0])?;
    let curve = birkhoff_rate_curve(&observable, &omega, &x0, &horizons)?;
    let fit = fit_decay(&curve)?;
    let tau = cfg.frequency.tau.unwrap_or(1.0);
    let predicted = predicted_decay_exponent(RateCase::Diophantine, 1.0, tau, 2, 0.0)?;
    let verdicts = vec![Verdict::new(
        "decay-at-least-predicted",
        fit.beta_hat >= predicted - 0.05,
        fit.beta_hat,
        predicted - 0.05,
        format!("fitted decay exponent vs envelope prediction {predicted:.4}"),
    )];
    Ok(BirkhoffReport {
        experiment: ExperimentKind::Birkhoff.name().to_string(),
        seed: cfg.seed,
        horizons: curve.horizons,
        errors: curve.errors,
        fitted_beta: fit.beta_hat,
        predicted_beta: predicted,
        verdicts,
    })
}

/// Linear-response experiment: g(x,v) = cos(2πx₁)·v₂, f = cos(2πx₁), A = I.
pub fn run_linear_response(cfg: &ExperimentConfig) -> Result<ResponseReportDoc, LabError> {
    let omega = build_frequency(cfg)?;
    if omega.dim() != 2 {
        return Err(LabError::Unsupported("linear-response experiment is planar".into()));
    }
    let f = FourierSeries::from_real_modes(2, 1, &[(vec![1, 0], Complex64::new(0.5, 0.0))])
        .expect("valid modes");
    let g = ModulatedVelocity::new(f.clone(), vec![0.0, 1.0], 0.0)?;
    let hessian = HessianMatrix::identity(2);
    let response = linear_response(&g, &f, &omega, &hessian)?;
    let eps = &cfg.response.eps_ladder;
    let d = finite_difference_response(&g, &f, &omega, &hessian, eps)?;
    let richardson = richardson_extrapolate(eps, &d);
    let expansion = response_expansion(&f, &omega, &hessian)?;
    let alpha1 = expansion.alpha1;
    let conjugacy_constants = conjugacy_residual_constants(&expansion.psi1, &omega, &expansion, eps)?;
    let fd_ladder: Vec<FdSample> =
        eps.iter().zip(&d).map(|(&e, &v)| FdSample { eps: e, d: v }).collect();
    let errors: Vec<f64> = d.iter().map(|v| (v - response).abs()).collect();
    let decreasing = errors.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let cmax = conjugacy_constants.iter().cloned().fold(0.0f64, f64::max);
    let cmin = conjugacy_constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let verdicts = vec![
        Verdict::new(
            "richardson-matches-response",
            (richardson - response).abs() <= 1e-6,
            (richardson - response).abs(),
            1e-6,
            "Richardson-extrapolated difference quotients vs spectral response".to_string(),
        ),
        Verdict::new(
            "fd-errors-decreasing",
            decreasing,
            if decreasing { 0.0 } else { 1.0 },
            0.0,
            "|D(eps) - response| decreases along the ladder".to_string(),
        ),
        Verdict::new(
            "conjugacy-constant-stable",
            cmin > 0.0 && cmax / cmin <= 2.0,
            cmax / cmin,
            2.0,
            "max/min of the per-eps conjugacy constants C(eps) = max|d/dt psi_eps - omega|/eps^2".to_string(),
        ),
    ];
    Ok(ResponseReportDoc {
        experiment: ExperimentKind::LinearResponse.name().to_string(),
        seed: cfg.seed,
        report: ResponseReport {
            alpha1,
            c1: expansion.c1.clone(),
            response,
            fd_ladder,
            richardson,
        },
        conjugacy_constants,
        verdicts,
    })
}

/// C(ε) = max over a trajectory of |d/dt ψ_ε(x(t)) − ω| / ε², with the
/// time derivative taken by the chain rule Dψ_ε(x)·V_ε(x).
fn conjugacy_residual_constants(
    psi1: &[FourierSeries],
    omega: &Frequency,
    expansion: &crate::linres::ResponseExpansion,
    eps_list: &[f64],
) -> Result<Vec<f64>, LabError> {
    let dim = omega.dim();
    let w = crate::linres::velocity_correction(&expansion.u1, &expansion.c1, &expansion.hessian)?;
    // Jacobian series of psi1.
    let jac: Vec<Vec<FourierSeries>> = psi1.iter().map(|c| c.gradient()).collect();
    let mut constants = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        // Flow field V_eps = omega + eps W as a Fourier field.
        let zero: Vec<i64> = vec![0; dim];
        let mut comps = Vec::with_capacity(dim);
        for (wj, &oj) in w.iter().zip(omega.components()) {
            let mut c = wj.scaled(eps);
            let cur = c.get(&zero).unwrap();
            c.set(&zero, cur + Complex64::new(oj, 0.0)).unwrap();
            comps.push(c);
        }
        let field = VectorField::Fourier { components: comps };
        let x0 = TorusPoint::new(vec![0.31, 0.47]).unwrap();
        let traj = integrate(&field, &x0, 10.0, 5e-3)?;
        let mut worst = 0.0f64;
        for idx in (0..traj.len()).step_by(10) {
            let x = traj.points()[idx].coords();
            let v = field.eval(x);
            // d/dt psi_eps = (I + eps Dpsi1(x)) v; residual vs omega.
            let mut resid2 = 0.0;
            for i in 0..dim {
                let mut dpsi_v = 0.0;
                for j in 0..dim {
                    dpsi_v += jac[i][j].eval(x) * v[j];
                }
                let r = v[i] + eps * dpsi_v - omega.components()[i];
                resid2 += r * r;
            }
            worst = worst.max(resid2.sqrt());
        }
        constants.push(worst / (eps * eps));
    }
    Ok(constants)
}

/// Dispatch an experiment and, when `out_dir` is set, emit
/// report.json / rows.csv / scaling.svg into it.
pub fn run(cfg: &ExperimentConfig) -> Result<LabReport, LabError> {
    cfg.validate()?;
    let report = match cfg.experiment {
        ExperimentKind::UpperBound => LabReport::Scaling(run_upper_bound(cfg)?),
        ExperimentKind::LowerBound2d => LabReport::Scaling(run_lower_bound_2d(cfg)?),
        ExperimentKind::HighdimLower => LabReport::Scaling(run_highdim_lower(cfg)?),
        ExperimentKind::Birkhoff => LabReport::Birkhoff(run_birkhoff(cfg)?),
        ExperimentKind::LinearResponse => LabReport::Response(run_linear_response(cfg)?),
    };
    if let Some(dir) = &cfg.out_dir {
        report.emit(std::path::Path::new(dir))?;
    }
    Ok(report)
}

/// Recompute a scaling report's verdicts from its rows; used to assert that
/// verdicts carry no hidden state.
pub fn recompute_verdicts(report: &ScalingReport) -> Vec<Verdict> {
    let kind = ExperimentKind::parse(&report.experiment).expect("known experiment tag");
    match kind {
        ExperimentKind::UpperBound => {
            let l = report.predicted_exponents.first().map(|p| p.value).unwrap_or(0.25);
            vec![
                verdict_envelope(&report.rows, crate::transport::Method::Entropic, l, 0.05),
                verdict_cross_method_sandwich(&report.rows),
            ]
        }
        ExperimentKind::LowerBound2d => {
            let fit: Option<ExponentFit> = fit_rows(&report.rows, crate::transport::Method::ClosedFormLines);
            let target = report.predicted_exponents.first().map(|p| p.value).unwrap_or(0.5);
            vec![
                verdict_closed_form_identity(&report.rows),
                verdict_exponent("exponent-matches-gap-prediction", fit.as_ref(), target, 0.05),
                verdict_cross_method_sandwich(&report.rows),
            ]
        }
        ExperimentKind::HighdimLower => {
            let dim = report.dimension;
            let min_dual = report
                .rows
                .iter()
                .filter(|r| r.method == crate::transport::Method::KrDual)
                .map(|r| r.w1)
                .fold(f64::INFINITY, f64::min);
            vec![
                verdict_schedule_sandwich(&report.schedules, dim),
                Verdict::new(
                    "dual-lower-positive",
                    min_dual > 0.0,
                    min_dual,
                    0.0,
                    "every dual lower bound is strictly positive".to_string(),
                ),
                verdict_cross_method_sandwich(&report.rows),
            ]
        }
        _ => Vec::new(),
    }
}
