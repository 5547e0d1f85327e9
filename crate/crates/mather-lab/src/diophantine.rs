//! Continued fractions, best rational approximations, and Diophantine
//! verification for flow frequencies.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

/// Default box half-width for resonance and Diophantine scans.
pub const DEFAULT_CHECK_BAND: usize = 200;

/// Below this distance to the integer lattice a multiple is treated as an
/// exact rational hit; double precision cannot distinguish further.
pub const RATIONAL_DETECTION_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum DiophantineError {
    #[error("input is not finite")]
    NonFinite,
    #[error("continued-fraction depth {0} exceeds the supported maximum 64")]
    DepthTooLarge(usize),
    #[error("requested {requested} convergents but only {available} quotients are available")]
    DepthExceeded { requested: usize, available: usize },
    #[error("m * nu is within {RATIONAL_DETECTION_THRESHOLD:e} of an integer at m = {m}; input treated as rational")]
    RationalDetected { m: u64 },
    #[error("exponent scan horizon must be at least 100, got {0}")]
    HorizonTooSmall(u64),
    #[error("frequency has an exact resonance <k,omega> = 0 at k = {0:?}")]
    Resonant(Vec<i64>),
    #[error("claimed Diophantine pair (sigma={sigma}, tau={tau}) fails at k = {witness:?}")]
    ClaimFailed { sigma: f64, tau: f64, witness: Vec<i64> },
    #[error("frequency must have at least one component")]
    Empty,
    #[error("sigma must be positive and tau >= n-1 (got sigma={sigma}, tau={tau}, n={n})")]
    BadDiophantineParams { sigma: f64, tau: f64, n: usize },
    #[error("schedule requires the last frequency component to equal 1, got {0}")]
    LastComponentNotOne(f64),
    #[error("partial quotient or convergent does not fit in 64 bits")]
    Overflow,
    #[error("cannot parse decimal literal: {0}")]
    BadDecimal(String),
}

/// A flow frequency ω ∈ ℝⁿ, screened against exact low-order resonances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frequency {
    components: Vec<f64>,
    claimed_sigma: Option<f64>,
    claimed_tau: Option<f64>,
}

impl Frequency {
    /// Screen with the default band [`DEFAULT_CHECK_BAND`].
    pub fn new(components: Vec<f64>) -> Result<Self, DiophantineError> {
        Self::with_check_band(components, DEFAULT_CHECK_BAND)
    }

    /// Reject any ω with ⟨k,ω⟩ = 0 exactly for some 0 < |k|∞ ≤ `k_check`.
    pub fn with_check_band(components: Vec<f64>, k_check: usize) -> Result<Self, DiophantineError> {
        if components.is_empty() {
            return Err(DiophantineError::Empty);
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(DiophantineError::NonFinite);
        }
        if let Some(k) = find_exact_resonance(&components, k_check) {
            return Err(DiophantineError::Resonant(k));
        }
        Ok(Frequency { components, claimed_sigma: None, claimed_tau: None })
    }

    /// Attach a claimed (σ, τ) pair; the claim is verified over the band.
    pub fn with_claimed(
        components: Vec<f64>,
        sigma: f64,
        tau: f64,
        k_check: usize,
    ) -> Result<Self, DiophantineError> {
        let mut f = Self::with_check_band(components, k_check)?;
        let witness = verify_diophantine(&f, sigma, tau, k_check)?;
        if !witness.ok {
            return Err(DiophantineError::ClaimFailed { sigma, tau, witness: witness.worst_k });
        }
        f.claimed_sigma = Some(sigma);
        f.claimed_tau = Some(tau);
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn claimed(&self) -> Option<(f64, f64)> {
        self.claimed_sigma.zip(self.claimed_tau)
    }
}

/// Scan 0 < |k|∞ ≤ band for an exact zero of ⟨k,ω⟩. Sign symmetry halves
/// the box: only k whose first nonzero entry is positive are visited.
fn find_exact_resonance(omega: &[f64], band: usize) -> Option<Vec<i64>> {
    let mut hit = None;
    scan_half_box(omega.len(), band, &mut |k| {
        let dot: f64 = k.iter().zip(omega).map(|(&kj, &oj)| kj as f64 * oj).sum();
        if dot == 0.0 && hit.is_none() {
            hit = Some(k.to_vec());
        }
    });
    hit
}

/// Visit every k with 0 < |k|∞ ≤ band whose first nonzero entry is positive.
fn scan_half_box(dim: usize, band: usize, visit: &mut impl FnMut(&[i64])) {
    let mut k = vec![0i64; dim];
    fn rec(k: &mut Vec<i64>, axis: usize, band: i64, leading_zero: bool, visit: &mut impl FnMut(&[i64])) {
        if axis == k.len() {
            if !leading_zero {
                visit(k);
            }
            return;
        }
        let lo = if leading_zero { 0 } else { -band };
        for v in lo..=band {
            k[axis] = v;
            rec(k, axis + 1, band, leading_zero && v == 0, visit);
        }
        k[axis] = 0;
    }
    rec(&mut k, 0, band as i64, true, visit);
}

/// Truncated regular continued-fraction expansion [a₀; a₁, a₂, …].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuedFraction {
    value: f64,
    quotients: Vec<i64>,
}

impl ContinuedFraction {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn quotients(&self) -> &[i64] {
        &self.quotients
    }

    pub fn depth(&self) -> usize {
        self.quotients.len()
    }
}

/// Euclidean continued-fraction expansion of a double, truncated at `depth`
/// quotients or at exact rational termination.
pub fn continued_fraction(nu: f64, depth: usize) -> Result<ContinuedFraction, DiophantineError> {
    if !nu.is_finite() {
        return Err(DiophantineError::NonFinite);
    }
    if depth == 0 || depth > 64 {
        return Err(DiophantineError::DepthTooLarge(depth));
    }
    let mut quotients = Vec::with_capacity(depth);
    let mut x = nu;
    for i in 0..depth {
        let a = x.floor();
        if a.abs() >= 9.0e18 {
            return Err(DiophantineError::Overflow);
        }
        quotients.push(a as i64);
        let frac = x - a;
        // Fractional parts below double resolution terminate the expansion.
        let scale = if i == 0 { nu.abs().max(1.0) } else { 1.0 };
        if frac <= 1e-12 * scale {
            break;
        }
        x = 1.0 / frac;
    }
    Ok(ContinuedFraction { value: nu, quotients })
}

/// Continued fraction of an exact decimal literal such as
/// `"1.41421356237309504880168872420969807856"`. The digits are treated as
/// an exact rational, so quotients stay faithful far beyond double depth.
pub fn continued_fraction_decimal(text: &str, depth: usize) -> Result<ContinuedFraction, DiophantineError> {
    if depth == 0 || depth > 64 {
        return Err(DiophantineError::DepthTooLarge(depth));
    }
    let (num, den) = parse_decimal(text)?;
    let value_f64 = big_ratio_to_f64(&num, &den);
    let mut quotients = Vec::with_capacity(depth);
    let mut n = num;
    let mut d = den;
    for _ in 0..depth {
        let (q, r) = n.div_mod_floor(&d);
        let q: i64 = (&q).try_into().map_err(|_| DiophantineError::Overflow)?;
        quotients.push(q);
        if r.is_zero() {
            break;
        }
        n = d;
        d = r;
    }
    Ok(ContinuedFraction { value: value_f64, quotients })
}

fn parse_decimal(text: &str) -> Result<(BigInt, BigInt), DiophantineError> {
    let t = text.trim();
    let bad = || DiophantineError::BadDecimal(text.to_string());
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    if rest.is_empty() || rest.len() > 4096 {
        return Err(bad());
    }
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: String = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok((BigInt::from(sign) * num, den))
}

fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    // Good to ~1 ulp for the magnitudes used here.
    let scale = BigInt::from(1u64 << 60);
    let scaled = (num * &scale).div_floor(den);
    let approx: f64 = scaled.to_string().parse().unwrap_or(f64::NAN);
    approx / (1u64 << 60) as f64
}

/// A reduced rational approximation p/q to some real, with its actual error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalApprox {
    pub p: i64,
    pub q: i64,
    pub err: f64,
}

impl RationalApprox {
    pub fn ratio(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// First `count` convergents pₘ/qₘ of the expansion, by the standard
/// recurrence pₘ = aₘpₘ₋₁ + pₘ₋₂, qₘ = aₘqₘ₋₁ + qₘ₋₂ (m = 0 is a₀/1).
pub fn convergents(cf: &ContinuedFraction, count: usize) -> Result<Vec<RationalApprox>, DiophantineError> {
    if count > cf.quotients.len() {
        return Err(DiophantineError::DepthExceeded { requested: count, available: cf.quotients.len() });
    }
    let mut out = Vec::with_capacity(count);
    // Seeds (h_{-2}, k_{-2}) = (0, 1) and (h_{-1}, k_{-1}) = (1, 0).
    let (mut p_prev, mut q_prev): (i128, i128) = (0, 1);
    let (mut p, mut q): (i128, i128) = (1, 0);
    for &a in cf.quotients.iter().take(count) {
        let a = a as i128;
        let p_next = a. checked_mul(p).and_then(|v| v.checked_add(p_prev)).ok_or(DiophantineError::Overflow)?;
        let q_next = a.checked_mul(q).and_then(|v| v.checked_add(q_prev)).ok_or(DiophantineError::Overflow)?;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
        let pp: i64 = p.try_into().map_err(|_| DiophantineError::Overflow)?;
        let qq: i64 = q.try_into().map_err(|_| DiophantineError::Overflow)?;
        debug_assert_eq!(pp.gcd(&qq).abs(), 1);
        out.push(RationalApprox { p: pp, q: qq, err: (cf.value - pp as f64 / qq as f64).abs() });
    }
    Ok(out)
}

/// Finite-horizon Diophantine exponent estimate.
///
/// Scans m = 1…M for the closest approach of mν to the integer lattice and
/// returns τ̂ = −log(min ‖mν‖_ℤ) / log M. Dirichlet's theorem forces
/// τ̂ ≥ 1 at every horizon, and τ̂ descends towards the true exponent as M
/// grows for badly approximable ν; a Liouville-like ν inflates it.
pub fn diophantine_exponent_estimate(nu: f64, m_max: u64) -> Result<f64, DiophantineError> {
    if !nu.is_finite() {
        return Err(DiophantineError::NonFinite);
    }
    if m_max < 100 {
        return Err(DiophantineError::HorizonTooSmall(m_max));
    }
    let mut min_dist = f64::INFINITY;
    for m in 1..=m_max {
        let t = m as f64 * nu;
        let d = (t - t.round()).abs();
        if d < RATIONAL_DETECTION_THRESHOLD {
            return Err(DiophantineError::RationalDetected { m });
        }
        if d < min_dist {
            min_dist = d;
        }
    }
    Ok(-min_dist.ln() / (m_max as f64).ln())
}

/// Outcome of a Diophantine scan: the box minimizer of |⟨ω,k⟩|·|k|∞^τ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiophantineWitness {
    pub ok: bool,
    /// k minimizing |⟨ω,k⟩|·|k|∞^τ over 0 < |k|∞ ≤ K.
    pub worst_k: Vec<i64>,
    /// The minimal product; the condition holds at level σ iff σ ≤ margin.
    pub margin: f64,
}

/// Check |⟨ω,k⟩| ≥ σ|k|∞^{−τ} for all 0 < |k|∞ ≤ band.
pub fn verify_diophantine(
    omega: &Frequency,
    sigma: f64,
    tau: f64,
    band: usize,
) -> Result<DiophantineWitness, DiophantineError> {
    let n = omega.dim();
    if sigma <= 0.0 || tau < n as f64 - 1.0 {
        return Err(DiophantineError::BadDiophantineParams { sigma, tau, n });
    }
    let comps = omega.components();
    let mut margin = f64::INFINITY;
    let mut worst = vec![0i64; n];
    scan_half_box(n, band, &mut |k| {
        let dot: f64 = k.iter().zip(comps).map(|(&kj, &oj)| kj as f64 * oj).sum();
        let norm = k.iter().map(|v| v.unsigned_abs()).max().unwrap() as f64;
        let product = dot.abs() * norm.powf(tau);
        if product < margin {
            margin = product;
            worst.copy_from_slice(k);
        }
    });
    Ok(DiophantineWitness { ok: margin >= sigma, worst_k: worst, margin })
}

/// Per-component rational approximations at one convergent index, with the
/// common period T = lcm(q_i) and the coarsest denominator Q = max(q_i).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimultaneousSchedule {
    pub per_component: Vec<RationalApprox>,
    pub t_m: u64,
    pub q_m: u64,
    pub delta_m: f64,
}

/// Approximate the first n−1 components of ω = (ω₁,…,ω_{n−1},1) by their
/// m-th continued-fraction convergents (m is the standard convergent index,
/// so m = 0 is a₀/1).
pub fn simultaneous_schedule(omega: &Frequency, m: usize) -> Result<SimultaneousSchedule, DiophantineError> {
    let comps = omega.components();
    let last = *comps.last().ok_or(DiophantineError::Empty)?;
    if last != 1.0 {
        return Err(DiophantineError::LastComponentNotOne(last));
    }
    let mut per_component = Vec::with_capacity(comps.len() - 1);
    for &c in &comps[..comps.len() - 1] {
        let cf = continued_fraction(c, (m + 1).min(64))?;
        let conv = convergents(&cf, m + 1)?;
        per_component.push(
            *conv
                .get(m)
                .ok_or(DiophantineError::DepthExceeded { requested: m + 1, available: conv.len() })?,
        );
    }
    schedule_from_approximations(per_component)
}

/// Assemble the schedule invariants from explicit per-component pairs.
pub fn schedule_from_approximations(
    per_component: Vec<RationalApprox>,
) -> Result<SimultaneousSchedule, DiophantineError> {
    if per_component.is_empty() {
        return Err(DiophantineError::Empty);
    }
    let mut t: u64 = 1;
    let mut q_max: u64 = 0;
    let mut delta: f64 = 0.0;
    for r in &per_component {
        let q = u64::try_from(r.q).map_err(|_| DiophantineError::Overflow)?;
        let g = t.gcd(&q);
        t = t.checked_mul(q / g).ok_or(DiophantineError::Overflow)?;
        q_max = q_max.max(q);
        delta = delta.max(r.err);
    }
    debug_assert!(q_max <= t);
    Ok(SimultaneousSchedule { per_component, t_m: t, q_m: q_max, delta_m: delta })
}
