//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all).
//!
//! Three clauses encode reference constants that disagree with the exact
//! transport mathematics; they are kept as stated, fail, and explain why:
//! see `criterion_01_reference_constant_as_stated`,
//! `criterion_03_reference_scaling_as_stated`, and
//! `criterion_09_fd_ratio_window_as_stated`. The companion tests carry the
//! solver-consistent versions of the same checks and pass.

use mather_lab::diophantine::{diophantine_exponent_estimate, Frequency};
use mather_lab::ergodic::{birkhoff_rate_curve, fit_decay, predicted_decay_exponent, RateCase};
use mather_lab::flows::{attracting_field, integrate};
use mather_lab::lab::config::{ExperimentConfig, ExperimentKind};
use mather_lab::lab::{attractor_empirical_measure, run_lower_bound_2d, run_upper_bound};
use mather_lab::linres::fourier::FourierSeries;
use mather_lab::linres::{
    finite_difference_response, linear_response, richardson_extrapolate, solve_c1_quadratic,
    solve_cohomological, HessianMatrix, ModulatedVelocity,
};
use mather_lab::measures::{
    min_dist_to_lines, GridDensity, LineFamilyMeasure, TorusPoint,
};
use mather_lab::transport::{
    line_distance_potential, w1_entropic, w1_exact, w1_kr_dual, Method,
};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const PHI: f64 = 1.618033988749894848204586834365638118;

fn golden_frequency() -> Frequency {
    Frequency::with_check_band(vec![1.0, PHI - 1.0], 64).unwrap()
}

fn report(criterion: &str, name: &str, pass: bool, started: Instant, detail: &str) {
    println!(
        "ACCEPTANCE {criterion:<4} {name:<44} {}  [{:6.2}s]  {detail}",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 1 (solver-consistent part): the dual potential against a 256²
/// Lebesgue quadrature and the entropic solver on a 64² grid must both
/// reproduce the closed-form transport value for line families (1,3), (1,2).
#[test]
fn criterion_01_closed_form_dual_and_entropic() {
    let t0 = Instant::now();
    let mut all = true;
    let mut details = Vec::new();
    for (p, q) in [(1i64, 3i64), (1, 2)] {
        let family = LineFamilyMeasure::new(p, q).unwrap();
        let closed = mather_lab::transport::w1_lines_closed_form(&family).value;

        let leb = mather_lab::transport::lebesgue_grid(2, 256);
        let lines_measure = mather_lab::measures::TorusMeasure::Lines(family);
        let dual = w1_kr_dual(&leb, &lines_measure, &[line_distance_potential(family)])
            .unwrap()
            .value;
        let dual_ok = (dual - closed).abs() <= 1e-3;

        let grid = GridDensity::lebesgue(vec![64, 64]).to_discrete();
        let samples = family.sample_points(64, 0.5);
        let entropic = w1_entropic(&grid, &samples, 1e-3, 10_000).unwrap().value;
        let entropic_ok = (entropic - closed).abs() <= 0.15 * closed;

        all &= dual_ok && entropic_ok;
        details.push(format!(
            "({p},{q}): closed {closed:.6}, dual {dual:.6} ({}), entropic {entropic:.6} ({})",
            if dual_ok { "ok" } else { "off" },
            if entropic_ok { "ok" } else { "off" }
        ));
    }
    report("1", "closed-form vs dual and entropic routes", all, t0, &details.join("; "));
    assert!(all, "{details:?}");
}

/// Criterion 1 (as stated): the closed-form function is required to return
/// 0.025 for (1,3) and 0.05 for (1,2), i.e. the value 1/(4(p²+q²)).
///
/// That constant is the strip cross-section integral ∫₀^d min(t,d−t) dt
/// summed over the q strips WITHOUT the strip length/area factor. Carrying
/// the disintegration factor (each strip has length 1/(qd), and q·(1/(qd))
/// ·d²/4 = d/4) gives W₁(Lebesgue, lines) = d/4 = 1/(4√(p²+q²)): the dual
/// potential ψ = distance-to-lines integrates to d/4 and the nearest-line
/// projection plan attains d/4, so the transport value is pinned from both
/// sides. The solvers in this crate agree with d/4 to 1e-3 (see the
/// companion test), so the stated constants cannot be met by any correct
/// route and this check fails by design rather than bend the solvers.
#[test]
fn criterion_01_reference_constant_as_stated() {
    let t0 = Instant::now();
    let l13 = mather_lab::transport::w1_lines_closed_form(&LineFamilyMeasure::new(1, 3).unwrap()).value;
    let l12 = mather_lab::transport::w1_lines_closed_form(&LineFamilyMeasure::new(1, 2).unwrap()).value;
    let pass = l13 == 0.025 && l12 == 0.05;
    report(
        "1*",
        "stated closed-form constants 0.025 / 0.05",
        pass,
        t0,
        &format!("computed {l13:.6} / {l12:.6}; exact value is gap/4 = 1/(4*sqrt(p^2+q^2))"),
    );
    assert!(
        pass,
        "stated constants 0.025/0.05 equal 1/(4(p^2+q^2)), but the transport value is \
         1/(4*sqrt(p^2+q^2)) = {l13:.6}/{l12:.6}: the cross-section integral is missing the \
         strip-length factor, and both the optimal dual potential and the projection plan \
         certify the latter value"
    );
}

/// Criterion 2: exact solver vs exhaustive coupling enumeration on 200
/// random instances with ≤ 6 uniform atoms per side.
#[test]
fn criterion_02_exact_oracle_equivalence() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0002);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let mu = mather_lab::measures::DiscreteMeasure::uniform(
            (0..n)
                .map(|_| TorusPoint::new(vec![rng.gen(), rng.gen()]).unwrap())
                .collect(),
        )
        .unwrap();
        let nu = mather_lab::measures::DiscreteMeasure::uniform(
            (0..n)
                .map(|_| TorusPoint::new(vec![rng.gen(), rng.gen()]).unwrap())
                .collect(),
        )
        .unwrap();
        let (result, _) = w1_exact(&mu, &nu).unwrap();
        let oracle = brute_force_uniform(&mu, &nu);
        worst = worst.max((result.value - oracle).abs());
    }
    let pass = worst <= 1e-9;
    report("2", "exact solver vs exhaustive couplings", pass, t0, &format!("worst |diff| {worst:.2e}"));
    assert!(pass, "worst deviation {worst}");
}

fn brute_force_uniform(
    mu: &mather_lab::measures::DiscreteMeasure,
    nu: &mather_lab::measures::DiscreteMeasure,
) -> f64 {
    let n = mu.len();
    let dist = |i: usize, j: usize| {
        mather_lab::measures::torus_distance(&mu.points[i], &nu.points[j]).unwrap()
    };
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }
    permute(&mut idx, 0, &mut |perm| {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| dist(i, j)).sum();
        best = best.min(total / n as f64);
    });
    best
}

/// Criterion 3 (solver-consistent part): over the Fibonacci convergents of
/// ν = φ−1 with q ∈ {3,5,8,13,21,34}, the closed-form rows satisfy the
/// internal identity W1·4√(p²+q²) = 1 to 1e-12, and the log-log fit of W1
/// against δ gives exponent 1/(r+1) = 0.5 ± 0.05; the report flags both the
/// 1/(r+1) and the 2/(r+1) predictions.
#[test]
fn criterion_03_lower_bound_scaling() {
    let t0 = Instant::now();
    let cfg = ExperimentConfig::defaults_for(ExperimentKind::LowerBound2d);
    let rep = run_lower_bound_2d(&cfg).unwrap();
    let qs: Vec<i64> = rep
        .rows
        .iter()
        .filter(|r| r.method == Method::ClosedFormLines)
        .filter_map(|r| r.q)
        .collect();
    assert_eq!(qs, vec![3, 5, 8, 13, 21, 34], "convergent denominators");
    let identity = rep.verdicts.iter().find(|v| v.name == "closed-form-identity").unwrap();
    let exponent = rep.verdicts.iter().find(|v| v.name == "exponent-matches-gap-prediction").unwrap();
    let both_predictions = rep.predicted_exponents.len() == 2
        && (rep.predicted_exponents[0].value - 0.5).abs() < 1e-12
        && (rep.predicted_exponents[1].value - 1.0).abs() < 1e-12;
    let pass = identity.pass && exponent.pass && both_predictions;
    report(
        "3",
        "lower-bound scaling (gap closed form)",
        pass,
        t0,
        &format!(
            "identity defect {:.2e}; fitted exponent {:.4} vs 0.5; predictions flagged: {}",
            identity.observed, exponent.observed, both_predictions
        ),
    );
    assert!(pass);
}

/// Criterion 3 (as stated): the identity W1·4q²(1+(p/q)²) = 1 per row and a
/// fitted exponent 2/(r+1) = 1.0 ± 0.05. Both presume the cross-section
/// constant 1/(4(p²+q²)); with the exact transport value d/4 the product is
/// √(p²+q²) and the exponent is 1/(r+1) = 0.5 (the scaling the gap value
/// supports, and the one the lifted lower bound inherits). Fails by design;
/// `criterion_01_reference_constant_as_stated` for the derivation.
#[test]
fn criterion_03_reference_scaling_as_stated() {
    let t0 = Instant::now();
    let cfg = ExperimentConfig::defaults_for(ExperimentKind::LowerBound2d);
    let rep = run_lower_bound_2d(&cfg).unwrap();
    let mut worst_identity = 0.0f64;
    for r in rep.rows.iter().filter(|r| r.method == Method::ClosedFormLines) {
        let (p, q) = (r.p.unwrap() as f64, r.q.unwrap() as f64);
        let stated = r.w1 * 4.0 * q * q * (1.0 + (p / q) * (p / q));
        worst_identity = worst_identity.max((stated - 1.0).abs());
    }
    let fit = rep.fit.expect("closed-form fit");
    let identity_ok = worst_identity <= 1e-12;
    let exponent_ok = (fit.exponent - 1.0).abs() <= 0.05;
    let pass = identity_ok && exponent_ok;
    report(
        "3*",
        "stated identity and 2/(r+1) exponent",
        pass,
        t0,
        &format!(
            "identity defect {worst_identity:.3e} (product = sqrt(p^2+q^2)); fitted exponent {:.4}",
            fit.exponent
        ),
    );
    assert!(
        pass,
        "with the exact value d/4 the stated product equals sqrt(p^2+q^2) != 1 \
         (worst defect {worst_identity:.3e}) and the closed-form exponent is 0.5, not 1.0 \
         (fitted {:.4}); the d^2/4 cross-section constant these clauses encode drops the \
         strip-length factor",
        fit.exponent
    );
}

/// Criterion 4: attractor realization — 20 random starts of the (1,3)
/// attracting field at δ = 0.05, T = 2000: every terminal point within 1e-6
/// of the line family, and the pooled empirical measure within entropic-W1
/// 0.01 of the stratified line sampling.
#[test]
fn criterion_04_attractor_realization() {
    let t0 = Instant::now();
    let (p, q, delta) = (1i64, 3i64, 0.05);
    let field = attracting_field(p, q, delta).unwrap();
    let family = LineFamilyMeasure::new(p, q).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);
    let mut worst_terminal = 0.0f64;
    for _ in 0..20 {
        let x0 = TorusPoint::new(vec![rng.gen(), rng.gen()]).unwrap();
        let traj = integrate(&field, &x0, 2000.0, 1e-2).unwrap();
        let d = min_dist_to_lines(traj.terminal(), &family).unwrap();
        worst_terminal = worst_terminal.max(d);
    }
    let terminal_ok = worst_terminal < 1e-6;

    let pooled = attractor_empirical_measure(p, q, delta, 20, 2000.0, 500.0, 1e-2, 2160, 0xACCE_0004)
        .unwrap();
    let samples = family.sample_points(96, 0.5);
    let w1 = w1_entropic(&pooled, &samples, 3e-3, 12_000).unwrap();
    let transport_ok = w1.value < 0.01;
    let pass = terminal_ok && transport_ok;
    report(
        "4",
        "attractor realization of the line family",
        pass,
        t0,
        &format!("worst terminal dist {worst_terminal:.2e}; pooled entropic W1 {:.5}", w1.value),
    );
    assert!(pass, "terminal {worst_terminal:.2e}, entropic {:.5}", w1.value);
}

/// Criterion 5: Birkhoff envelope — F = cos(2πx₁) + cos(2π(x₁+x₂)),
/// ω = (1, φ−1), 12 log-spaced horizons in [10, 1e4]: fitted decay exponent
/// at least 1/3 − 0.05.
#[test]
fn criterion_05_birkhoff_envelope() {
    let t0 = Instant::now();
    let omega = golden_frequency();
    let f = FourierSeries::from_real_modes(
        2,
        1,
        &[
            (vec![1, 0], Complex64::new(0.5, 0.0)),
            (vec![1, 1], Complex64::new(0.5, 0.0)),
        ],
    )
    .unwrap();
    let horizons: Vec<f64> = (0..12).map(|i| 10.0 * 1000f64.powf(i as f64 / 11.0)).collect();
    let x0 = TorusPoint::new(vec![0.0, 0.0]).unwrap();
    let curve = birkhoff_rate_curve(&f, &omega, &x0, &horizons).unwrap();
    let fit = fit_decay(&curve).unwrap();
    let predicted = predicted_decay_exponent(RateCase::Diophantine, 1.0, 1.0, 2, 0.0).unwrap();
    let pass = fit.beta_hat >= predicted - 0.05;
    report(
        "5",
        "Birkhoff decay envelope",
        pass,
        t0,
        &format!("fitted beta {:.4} vs envelope {:.4}", fit.beta_hat, predicted),
    );
    assert!(pass, "beta {} predicted {}", fit.beta_hat, predicted);
}

/// Criterion 6: upper-bound envelope — fixed unit-sup perturbation family,
/// δ ∈ {0.02, 0.01, 0.005, 0.0025}: no entropic row exceeds the fitted
/// quarter-power envelope by more than 5%.
#[test]
fn criterion_06_upper_bound_envelope() {
    let t0 = Instant::now();
    let cfg = ExperimentConfig::defaults_for(ExperimentKind::UpperBound);
    assert_eq!(cfg.perturbation.delta_grid, vec![0.02, 0.01, 0.005, 0.0025]);
    let rep = run_upper_bound(&cfg).unwrap();
    let envelope = rep.verdicts.iter().find(|v| v.name == "envelope").unwrap();
    let sandwich = rep.verdicts.iter().find(|v| v.name == "cross-method-sandwich").unwrap();
    let pass = envelope.pass && sandwich.pass;
    report(
        "6",
        "upper-bound quarter-power envelope",
        pass,
        t0,
        &format!(
            "worst envelope excess {:.2e} (limit 5%); sandwich defect {:.2e}; fitted exponent {:?}",
            envelope.observed,
            sandwich.observed,
            rep.fit.map(|f| f.exponent)
        ),
    );
    assert!(pass);
}

/// Criteria 7 and 8: cohomological residual below 1e-10 on a 64² grid for
/// 100 random band-8 real right-hand sides, and |c₁| < 1e-12 on every
/// instance.
#[test]
fn criterion_07_08_cohomological_residual_and_c1() {
    let t0 = Instant::now();
    let omega = golden_frequency();
    let hessian = HessianMatrix::identity(2);
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0007);
    let mut worst_resid = 0.0f64;
    let mut worst_c1 = 0.0f64;
    for _ in 0..100 {
        let mut modes = Vec::new();
        for k1 in -8i64..=8 {
            for k2 in -8i64..=8 {
                if (k1, k2) <= (0, 0) {
                    continue;
                }
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                modes.push((vec![k1, k2], c));
            }
        }
        let f = FourierSeries::from_real_modes(2, 8, &modes).unwrap();
        let u1 = solve_cohomological(&f, &omega).unwrap();
        // Residual of <omega, grad u1> - ([f] - f) on the 64^2 grid.
        let lhs = u1.directional_derivative(omega.components());
        let lhs_grid = lhs.grid_values(64).unwrap();
        let f_grid = f.grid_values(64).unwrap();
        let mean = f.mean().re;
        let resid = lhs_grid
            .iter()
            .zip(&f_grid)
            .map(|(l, fv)| (l - (mean - fv)).abs())
            .fold(0.0f64, f64::max);
        worst_resid = worst_resid.max(resid);
        let c1 = solve_c1_quadratic(&hessian, &u1).unwrap();
        worst_c1 = worst_c1.max(c1.iter().fold(0.0f64, |a, &v| a.max(v.abs())));
    }
    let pass7 = worst_resid < 1e-10;
    let pass8 = worst_c1 < 1e-12;
    report("7", "cohomological residual on 64^2 grid", pass7, t0, &format!("worst {worst_resid:.2e}"));
    report("8", "first-order cohomology shift degenerate", pass8, t0, &format!("worst |c1| {worst_c1:.2e}"));
    assert!(pass7 && pass8);
}

fn response_instance() -> (ModulatedVelocity, FourierSeries, Frequency, HessianMatrix) {
    let omega = golden_frequency();
    let f = FourierSeries::from_real_modes(2, 1, &[(vec![1, 0], Complex64::new(0.5, 0.0))]).unwrap();
    let g = ModulatedVelocity::new(f.clone(), vec![0.0, 1.0], 0.0).unwrap();
    (g, f, omega, HessianMatrix::identity(2))
}

/// Criterion 9 (solver-consistent part): the Richardson-extrapolated limit
/// of the difference quotients matches the spectral response within 1e-6;
/// the conjugacy residual scales as Cε² with C stable across the ladder;
/// and the response value agrees with the closed form −ω₂/2 (frozen after
/// confirmation by the difference-quotient oracle).
#[test]
fn criterion_09_response_limit_and_conjugacy() {
    let t0 = Instant::now();
    let (g, f, omega, hessian) = response_instance();
    let response = linear_response(&g, &f, &omega, &hessian).unwrap();
    // Closed form from expanding the two single-mode products: -omega_2/2.
    let closed = -omega.components()[1] / 2.0;
    let closed_ok = (response - closed).abs() < 1e-12;
    let eps = [1e-2, 5e-3, 2.5e-3];
    let d = finite_difference_response(&g, &f, &omega, &hessian, &eps).unwrap();
    let richardson = richardson_extrapolate(&eps, &d);
    let rich_ok = (richardson - response).abs() <= 1e-6;
    // Conjugacy constants via the packaged experiment.
    let cfg = ExperimentConfig::defaults_for(ExperimentKind::LinearResponse);
    let doc = mather_lab::lab::run_linear_response(&cfg).unwrap();
    let conj = doc.verdicts.iter().find(|v| v.name == "conjugacy-constant-stable").unwrap();
    let pass = closed_ok && rich_ok && conj.pass;
    report(
        "9",
        "response limit, Richardson, conjugacy",
        pass,
        t0,
        &format!(
            "response {response:.12} (closed {closed:.12}); |Richardson - response| {:.2e}; C-ratio {:.4}",
            (richardson - response).abs(),
            conj.observed
        ),
    );
    assert!(pass);
}

/// Criterion 9 (as stated): |D(ε) − response| must halve (ratio within
/// [1.7, 2.3]) along ε ∈ {1e-2, 5e-3, 2.5e-3}.
///
/// For this pinned instance the quotient D(ε) is an even function of ε:
/// the surrogate field ω + εW and conjugacy id + εψ₁ built from
/// f = cos(2πx₁) map under ε → −ε to their pullbacks by the half-period
/// shift x₁ ↦ x₁ + ½, which leaves the Lebesgue pairing invariant. The
/// first-order term of D(ε) − response therefore vanishes identically
/// (D(ε) = −ω₂·J₁(ε)/ε in closed form, J₁ the Bessel function), the error
/// decays like ε²/16, and consecutive-halving ratios converge to 4 — the
/// stated window [1.7, 2.3] cannot be met by this instance. Kept as stated,
/// failing, rather than silently replacing the instance.
#[test]
fn criterion_09_fd_ratio_window_as_stated() {
    let t0 = Instant::now();
    let (g, f, omega, hessian) = response_instance();
    let response = linear_response(&g, &f, &omega, &hessian).unwrap();
    let eps = [1e-2, 5e-3, 2.5e-3];
    let d = finite_difference_response(&g, &f, &omega, &hessian, &eps).unwrap();
    let errs: Vec<f64> = d.iter().map(|v| (v - response).abs()).collect();
    let r01 = errs[0] / errs[1];
    let r12 = errs[1] / errs[2];
    let in_window = |r: f64| (1.7..=2.3).contains(&r);
    let pass = in_window(r01) && in_window(r12);
    report(
        "9*",
        "stated first-order ratio window [1.7, 2.3]",
        pass,
        t0,
        &format!("ratios {r01:.3}, {r12:.3} (second-order instance: D(eps) = -omega_2 J1(eps)/eps)"),
    );
    assert!(
        pass,
        "measured ratios {r01:.3}, {r12:.3}: the instance converges at second order \
         (errors ~ omega_2 eps^2/16, ratios -> 4) because D(eps) is even in eps for the \
         single-mode perturbation; a first-order window cannot hold"
    );
}

/// Criterion 10: Diophantine exponent estimator sanity at M = 1e5.
#[test]
fn criterion_10_exponent_estimator() {
    let t0 = Instant::now();
    let phi_hat = diophantine_exponent_estimate(PHI, 100_000).unwrap();
    let sqrt2_hat = diophantine_exponent_estimate(2f64.sqrt(), 100_000).unwrap();
    let pass = (phi_hat - 1.0).abs() <= 0.05 && (sqrt2_hat - 1.0).abs() <= 0.10;
    report(
        "10",
        "Diophantine exponent estimator",
        pass,
        t0,
        &format!("tau_hat(phi) {phi_hat:.4}, tau_hat(sqrt2) {sqrt2_hat:.4}"),
    );
    assert!(pass);
}

/// Criterion 11: determinism — identical config + seed produce byte-identical
/// report.json (and rows.csv, scaling.svg).
#[test]
fn criterion_11_determinism() {
    let t0 = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults_for(ExperimentKind::LowerBound2d);
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");
    cfg.out_dir = Some(dir_a.to_string_lossy().into_owned());
    mather_lab::lab::run(&cfg).unwrap();
    cfg.out_dir = Some(dir_b.to_string_lossy().into_owned());
    mather_lab::lab::run(&cfg).unwrap();
    let mut pass = true;
    for file in ["report.json", "rows.csv", "scaling.svg"] {
        let a = std::fs::read(dir_a.join(file)).unwrap();
        let b = std::fs::read(dir_b.join(file)).unwrap();
        pass &= a == b;
    }
    report("11", "byte-identical reports for fixed seed", pass, t0, "report.json, rows.csv, scaling.svg");
    assert!(pass);
}
