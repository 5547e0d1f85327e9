//! Experiment reports: JSON documents, CSV rows, SVG charts, and verdicts
//! that are recomputable from the rows they summarize.

use crate::lab::svg::{log_log_chart, Series};
use crate::linres::ResponseReport;
use crate::transport::{BoundType, Method};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    /// The sweep parameter: δ for amplitude sweeps, δ_j or δ_m for
    /// convergent sweeps.
    pub param: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<i64>,
    pub w1: f64,
    pub method: Method,
    pub bound_type: BoundType,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleRow {
    pub m: usize,
    pub t_m: u64,
    pub q_m: u64,
    pub delta_m: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictedExponent {
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub limit: f64,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, observed: f64, limit: f64, detail: String) -> Self {
        Verdict { name: name.to_string(), pass, observed, limit, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub experiment: String,
    pub seed: u64,
    /// Torus dimension of the underlying experiment.
    pub dimension: usize,
    pub rows: Vec<ReportRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ExponentFit>,
    pub predicted_exponents: Vec<PredictedExponent>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub schedules: Vec<ScheduleRow>,
    pub verdicts: Vec<Verdict>,
}

/// Least squares of log w1 against log param over the rows of one method.
pub fn fit_rows(rows: &[ReportRow], method: Method) -> Option<ExponentFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.method == method && r.param > 0.0 && r.w1 > 1e-300)
        .map(|r| (r.param.ln(), r.w1.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - (intercept + slope * p.0)).powi(2)).sum();
    Some(ExponentFit {
        exponent: slope,
        log_intercept: intercept,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
    })
}

/// Closed-form rows must satisfy w1·4√(p²+q²) = 1 to 1e-12; the worst
/// deviation is the observed value.
pub fn verdict_closed_form_identity(rows: &[ReportRow]) -> Verdict {
    let mut worst = 0.0f64;
    for r in rows.iter().filter(|r| r.method == Method::ClosedFormLines) {
        if let (Some(p), Some(q)) = (r.p, r.q) {
            let product = r.w1 * 4.0 * ((p * p + q * q) as f64).sqrt();
            worst = worst.max((product - 1.0).abs());
        }
    }
    Verdict::new(
        "closed-form-identity",
        worst <= 1e-12,
        worst,
        1e-12,
        "max |w1 * 4 sqrt(p^2+q^2) - 1| over closed-form rows".to_string(),
    )
}

/// Fitted exponent within tolerance of a prediction.
pub fn verdict_exponent(name: &str, fit: Option<&ExponentFit>, predicted: f64, tol: f64) -> Verdict {
    match fit {
        Some(f) => Verdict::new(
            name,
            (f.exponent - predicted).abs() <= tol,
            f.exponent,
            predicted,
            format!("fitted exponent vs prediction {predicted:.4} ± {tol}"),
        ),
        None => Verdict::new(name, false, f64::NAN, predicted, "no fit available".to_string()),
    }
}

/// Envelope check with fitted constant: Ĉ = max w1/param^l over the rows of
/// one method; no row may exceed (1+slack)·Ĉ·param^l.
pub fn verdict_envelope(rows: &[ReportRow], method: Method, l: f64, slack: f64) -> Verdict {
    let selected: Vec<&ReportRow> =
        rows.iter().filter(|r| r.method == method && r.param > 0.0 && r.w1 > 0.0).collect();
    if selected.is_empty() {
        return Verdict::new("envelope", false, f64::NAN, l, "no rows for envelope".to_string());
    }
    let c_hat = selected.iter().map(|r| r.w1 / r.param.powf(l)).fold(0.0f64, f64::max);
    let mut worst_excess = 0.0f64;
    for r in &selected {
        let envelope = c_hat * r.param.powf(l);
        worst_excess = worst_excess.max(r.w1 / envelope - 1.0);
    }
    Verdict::new(
        "envelope",
        worst_excess <= slack,
        worst_excess,
        slack,
        format!("max relative excess over fitted envelope C*param^{l:.4}, C = {c_hat:.6e}"),
    )
}

/// Per-parameter cross-method sandwich: every lower bound must sit below
/// every exact value (tolerance 1e-9) and below every approximate value
/// (tolerance 1e-5, covering the entropic marginal defect). Lifted-lower
/// rows bound the tangent-bundle distance, a different quantity from the
/// base-space rows, so they stay out of the comparison.
pub fn verdict_cross_method_sandwich(rows: &[ReportRow]) -> Verdict {
    let mut worst = 0.0f64;
    let mut params: Vec<f64> = rows.iter().map(|r| r.param).collect();
    params.sort_by(|a, b| a.partial_cmp(b).unwrap());
    params.dedup();
    for &param in &params {
        let group: Vec<&ReportRow> = rows.iter().filter(|r| r.param == param).collect();
        let lower_max = group
            .iter()
            .filter(|r| r.bound_type == BoundType::Lower && r.method != Method::LiftedLower)
            .map(|r| r.w1)
            .fold(f64::NEG_INFINITY, f64::max);
        if !lower_max.is_finite() {
            continue;
        }
        for r in &group {
            match r.bound_type {
                BoundType::Exact => worst = worst.max(lower_max - r.w1 - 1e-9),
                BoundType::Approximate => worst = worst.max(lower_max - r.w1 - 1e-5),
                _ => {}
            }
        }
    }
    Verdict::new(
        "cross-method-sandwich",
        worst <= 0.0,
        worst,
        0.0,
        "max excess of lower bounds over exact/approximate values".to_string(),
    )
}

/// Schedule sandwich Q_m ≤ T_m ≤ Q_m^{n−1}.
pub fn verdict_schedule_sandwich(schedules: &[ScheduleRow], dim: usize) -> Verdict {
    let mut ok = true;
    for s in schedules {
        let upper = (s.q_m as f64).powi(dim as i32 - 1);
        if !(s.q_m <= s.t_m && (s.t_m as f64) <= upper * (1.0 + 1e-12)) {
            ok = false;
        }
    }
    Verdict::new(
        "schedule-sandwich",
        ok,
        if ok { 0.0 } else { 1.0 },
        0.0,
        format!("Q_m <= T_m <= Q_m^{} on every schedule row", dim - 1),
    )
}

impl ScalingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("param,p,q,w1,method,bound_type\n");
        for r in &self.rows {
            let p = r.p.map(|v| v.to_string()).unwrap_or_default();
            let q = r.q.map(|v| v.to_string()).unwrap_or_default();
            let method = serde_json::to_string(&r.method).unwrap().replace('"', "");
            let bound = serde_json::to_string(&r.bound_type).unwrap().replace('"', "");
            out.push_str(&format!("{:.12e},{p},{q},{:.12e},{method},{bound}\n", r.param, r.w1));
        }
        out
    }

    pub fn svg(&self) -> String {
        let mut methods: Vec<Method> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method) {
                methods.push(r.method);
            }
        }
        let series: Vec<Series> = methods
            .iter()
            .map(|&m| Series {
                label: match m {
                    Method::ExactDiscrete => "exact",
                    Method::Entropic => "entropic",
                    Method::KrDual => "kr-dual",
                    Method::ClosedFormLines => "closed-form",
                    Method::LiftedLower => "lifted-lower",
                },
                points: self
                    .rows
                    .iter()
                    .filter(|r| r.method == m)
                    .map(|r| (r.param, r.w1))
                    .collect(),
            })
            .collect();
        log_log_chart(&self.experiment, "delta", "W1", &series)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Birkhoff-rate experiment document.
#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffReport {
    pub experiment: String,
    pub seed: u64,
    pub horizons: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_beta: f64,
    pub predicted_beta: f64,
    pub verdicts: Vec<Verdict>,
}

impl BirkhoffReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("T,error\n");
        for (t, e) in self.horizons.iter().zip(&self.errors) {
            out.push_str(&format!("{t:.12e},{e:.12e}\n"));
        }
        out
    }

    pub fn svg(&self) -> String {
        let series = vec![Series {
            label: "birkhoff error",
            points: self.horizons.iter().cloned().zip(self.errors.iter().cloned()).collect(),
        }];
        log_log_chart(&self.experiment, "T", "|avg - mean|", &series)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Linear-response experiment document.
#[derive(Debug, Clone, Serialize)]
pub struct ResponseReportDoc {
    pub experiment: String,
    pub seed: u64,
    #[serde(flatten)]
    pub report: ResponseReport,
    pub conjugacy_constants: Vec<f64>,
    pub verdicts: Vec<Verdict>,
}

impl ResponseReportDoc {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("eps,D,abs_err_vs_response\n");
        for s in &self.report.fd_ladder {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e}\n",
                s.eps,
                s.d,
                (s.d - self.report.response).abs()
            ));
        }
        out
    }

    pub fn svg(&self) -> String {
        let series = vec![Series {
            label: "|D(eps) - response|",
            points: self
                .report
                .fd_ladder
                .iter()
                .map(|s| (s.eps, (s.d - self.report.response).abs().max(1e-18)))
                .collect(),
        }];
        log_log_chart(&self.experiment, "eps", "|D - response|", &series)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Any experiment output, with uniform emission.
#[derive(Debug, Clone)]
pub enum LabReport {
    Scaling(ScalingReport),
    Birkhoff(BirkhoffReport),
    Response(ResponseReportDoc),
}

impl LabReport {
    pub fn to_json(&self) -> String {
        match self {
            LabReport::Scaling(r) => r.to_json(),
            LabReport::Birkhoff(r) => r.to_json(),
            LabReport::Response(r) => r.to_json(),
        }
    }

    pub fn rows_csv(&self) -> String {
        match self {
            LabReport::Scaling(r) => r.rows_csv(),
            LabReport::Birkhoff(r) => r.rows_csv(),
            LabReport::Response(r) => r.rows_csv(),
        }
    }

    pub fn svg(&self) -> String {
        match self {
            LabReport::Scaling(r) => r.svg(),
            LabReport::Birkhoff(r) => r.svg(),
            LabReport::Response(r) => r.svg(),
        }
    }

    pub fn verdicts(&self) -> &[Verdict] {
        match self {
            LabReport::Scaling(r) => &r.verdicts,
            LabReport::Birkhoff(r) => &r.verdicts,
            LabReport::Response(r) => &r.verdicts,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts().iter().all(|v| v.pass)
    }

    /// Write report.json, rows.csv, and scaling.svg into `dir`.
    pub fn emit(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("report.json"))?;
        f.write_all(self.to_json().as_bytes())?;
        let mut c = std::fs::File::create(dir.join("rows.csv"))?;
        c.write_all(self.rows_csv().as_bytes())?;
        let mut s = std::fs::File::create(dir.join("scaling.svg"))?;
        s.write_all(self.svg().as_bytes())?;
        Ok(())
    }
}
