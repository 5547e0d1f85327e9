//! Cross-module consistency checks that exercise two or more subsystems
//! against each other.

use mather_lab::diophantine::{verify_diophantine, Frequency};
use mather_lab::flows::{integrate, VectorField};
use mather_lab::lab::config::{ExperimentConfig, ExperimentKind};
use mather_lab::linres::fourier::FourierSeries;
use mather_lab::linres::{response_expansion, velocity_correction, HessianMatrix};
use mather_lab::measures::{
    empirical_from_trajectory, pushforward, torus_distance, LineFamilyMeasure, SpaceTag,
    TorusPoint,
};
use mather_lab::transport::{w1_exact, Method};
use num_complex::Complex64;

const PHI: f64 = 1.618033988749894848204586834365638118;

/// Line families are invariant under their rational flow: pushing the
/// sampled measure through the time-t flow and resampling the family with
/// the matching phase must agree to solver precision.
#[test]
fn line_family_flow_invariance() {
    let (p, q) = (1i64, 3i64);
    let family = LineFamilyMeasure::new(p, q).unwrap();
    let per_line = 64usize;
    let field = VectorField::RationalConstant { p, q };
    for t in [0.1, 1.0, q as f64] {
        let reference = family.sample_points(per_line, 0.0);
        let pushed = pushforward(&reference, &|pt| {
            let c = pt.coords();
            TorusPoint::new(vec![c[0] + t, c[1] + t * p as f64 / q as f64]).unwrap()
        });
        // The flow advances the abscissa by t, so the matched sampling has
        // phase per_line * t (mod 1).
        let phase = (per_line as f64 * t).rem_euclid(1.0);
        let matched = family.sample_points(per_line, phase);
        let (w1, _) = w1_exact(&pushed, &matched).unwrap();
        assert!(w1.value <= 1e-6, "t={t}: W1 = {}", w1.value);
    }
    // Sanity: the pushforward really is the time-t flow map.
    let x0 = TorusPoint::new(vec![0.2, 0.4]).unwrap();
    let traj = integrate(&field, &x0, 0.5, 1e-2).unwrap();
    let end = traj.terminal();
    let manual = TorusPoint::new(vec![0.2 + 0.5, 0.4 + 0.5 / 3.0]).unwrap();
    assert!(torus_distance(end, &manual).unwrap() < 1e-12);
}

/// The spectral band used by the response machinery stays clear of the
/// Diophantine floor measured by the arithmetic module.
#[test]
fn small_divisor_band_consistency() {
    let omega = Frequency::with_check_band(vec![1.0, PHI - 1.0], 64).unwrap();
    let band = 16usize;
    let witness = verify_diophantine(&omega, 1e-9, 1.0, band).unwrap();
    assert!(witness.ok);
    // Independent scan over the band: |<k,omega>| >= margin / |k|_inf.
    let comps = omega.components();
    for k1 in -(band as i64)..=band as i64 {
        for k2 in -(band as i64)..=band as i64 {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let dot = (k1 as f64 * comps[0] + k2 as f64 * comps[1]).abs();
            let norm = k1.abs().max(k2.abs()) as f64;
            assert!(
                dot >= witness.margin / norm - 1e-15,
                "k = ({k1},{k2}): {dot} vs {}",
                witness.margin / norm
            );
        }
    }
}

/// Conjugacy residual along true trajectories: for the flow of ω + εW the
/// transported map ψ_ε = id + εψ₁ satisfies |d/dt ψ_ε(x(t)) − ω| ≤ Cε²
/// with C stable across the ladder.
#[test]
fn conjugacy_residual_scales_quadratically() {
    let omega = Frequency::with_check_band(vec![1.0, PHI - 1.0], 64).unwrap();
    let f = FourierSeries::from_real_modes(2, 1, &[(vec![1, 0], Complex64::new(0.5, 0.0))]).unwrap();
    let hessian = HessianMatrix::identity(2);
    let expansion = response_expansion(&f, &omega, &hessian).unwrap();
    let w = velocity_correction(&expansion.u1, &expansion.c1, &hessian).unwrap();
    let jac: Vec<Vec<FourierSeries>> = expansion.psi1.iter().map(|c| c.gradient()).collect();
    let mut constants = Vec::new();
    for eps in [1e-2, 1e-3] {
        let mut comps = Vec::new();
        for (wj, &oj) in w.iter().zip(omega.components()) {
            let mut c = wj.scaled(eps);
            let cur = c.get(&[0, 0]).unwrap();
            c.set(&[0, 0], cur + Complex64::new(oj, 0.0)).unwrap();
            comps.push(c);
        }
        let field = VectorField::Fourier { components: comps };
        let x0 = TorusPoint::new(vec![0.13, 0.71]).unwrap();
        let traj = integrate(&field, &x0, 10.0, 5e-3).unwrap();
        let mut worst = 0.0f64;
        for idx in (0..traj.len()).step_by(7) {
            let x = traj.points()[idx].coords();
            let v = field.eval(x);
            let mut resid2 = 0.0;
            for i in 0..2 {
                let dpsi_v: f64 = (0..2).map(|j| jac[i][j].eval(x) * v[j]).sum();
                let r = v[i] + eps * dpsi_v - omega.components()[i];
                resid2 += r * r;
            }
            worst = worst.max(resid2.sqrt());
        }
        constants.push(worst / (eps * eps));
    }
    let ratio = constants[0].max(constants[1]) / constants[0].min(constants[1]);
    assert!(ratio <= 2.0, "C(1e-2) = {}, C(1e-3) = {}", constants[0], constants[1]);
}

/// The planar degenerate case of the simultaneous-approximation experiment
/// reproduces the closed-form rows of the planar lower-bound experiment.
#[test]
fn highdim_degenerates_to_planar_rows() {
    let mut high = ExperimentConfig::defaults_for(ExperimentKind::HighdimLower);
    high.frequency.components = vec![PHI - 1.0, 1.0];
    high.frequency.check_band = 64;
    high.perturbation.convergent_min = 3;
    high.perturbation.convergent_max = 6;
    let high_rep = mather_lab::lab::run_highdim_lower(&high).unwrap();

    let mut planar = ExperimentConfig::defaults_for(ExperimentKind::LowerBound2d);
    planar.perturbation.convergent_min = 3;
    planar.perturbation.convergent_max = 6;
    let planar_rep = mather_lab::lab::run_lower_bound_2d(&planar).unwrap();

    let pick = |rep: &mather_lab::lab::report::ScalingReport| -> Vec<(i64, f64)> {
        rep.rows
            .iter()
            .filter(|r| r.method == Method::ClosedFormLines)
            .map(|r| (r.q.unwrap(), r.w1))
            .collect()
    };
    let high_rows = pick(&high_rep);
    let planar_rows = pick(&planar_rep);
    assert_eq!(high_rows.len(), planar_rows.len());
    for ((qa, wa), (qb, wb)) in high_rows.iter().zip(&planar_rows) {
        assert_eq!(qa, qb);
        assert!((wa - wb).abs() <= 1e-9, "q={qa}: {wa} vs {wb}");
    }
    // And the dual lower bounds respect the closed form.
    for r in high_rep.rows.iter().filter(|r| r.method == Method::KrDual) {
        let closed = high_rep
            .rows
            .iter()
            .find(|c| c.method == Method::ClosedFormLines && c.param == r.param)
            .unwrap();
        assert!(r.w1 <= closed.w1 + 1e-9);
    }
}

/// Report verdicts carry no hidden state: recomputing them from the rows
/// reproduces pass flags and observed values.
#[test]
fn report_verdicts_are_recomputable() {
    for kind in [ExperimentKind::LowerBound2d, ExperimentKind::HighdimLower] {
        let cfg = ExperimentConfig::defaults_for(kind);
        let rep = match kind {
            ExperimentKind::LowerBound2d => mather_lab::lab::run_lower_bound_2d(&cfg).unwrap(),
            _ => mather_lab::lab::run_highdim_lower(&cfg).unwrap(),
        };
        let recomputed = mather_lab::lab::recompute_verdicts(&rep);
        assert_eq!(rep.verdicts.len(), recomputed.len());
        for (a, b) in rep.verdicts.iter().zip(&recomputed) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.pass, b.pass);
            assert!((a.observed - b.observed).abs() < 1e-12 || (a.observed.is_nan() && b.observed.is_nan()));
        }
    }
}

/// Empirical measures of a constant-field trajectory: uniform weights on an
/// orbit segment, tagged with velocities that all equal ω.
#[test]
fn constant_field_empirical_measure() {
    let omega = vec![1.0, PHI - 1.0];
    let field = VectorField::Constant(omega.clone());
    let x0 = TorusPoint::new(vec![0.0, 0.0]).unwrap();
    let traj = integrate(&field, &x0, 5.0, 1e-2).unwrap();
    let m = empirical_from_trajectory(&traj, 1.0).unwrap();
    assert_eq!(m.space_tag, SpaceTag::Tangent);
    let w0 = m.weights[0];
    assert!(m.weights.iter().all(|&w| (w - w0).abs() < 1e-15));
    for v in m.velocities.as_ref().unwrap() {
        assert!((v[0] - omega[0]).abs() < 1e-12 && (v[1] - omega[1]).abs() < 1e-12);
    }
}
