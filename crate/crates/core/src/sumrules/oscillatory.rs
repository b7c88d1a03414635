//! Oscillating perturbations `c cos(2πθn + φ) / n^γ` and the conditions on
//! their Fourier partial sums at the frequencies `k·ω`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::perturb::{PerturbationSpec, Shape, Target};
use super::series::{diagnose_complex, ComplexSeriesDiagnostics, Verdict};
use crate::error::{Error, Result};

/// Frequencies closer than this (mod 1) count as equal.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Default range of `Σ|k_j|` for frequency checks.
pub const DEFAULT_K_NORM: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Value(f64),
    /// `k·ω` for this integer vector.
    Harmonic(Vec<i64>),
}

fn dist_mod_one(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `k·ω` reduced to `[0, 1)`.
pub fn k_frequency(k: &[i64], omega: &[f64]) -> f64 {
    k.iter().zip(omega).map(|(&k, w)| k as f64 * w).sum::<f64>().rem_euclid(1.0)
}

/// All `k ∈ ℤ^ℓ` with `Σ|k_j| ≤ max_norm`, ordered by norm then
/// lexicographically.
pub fn k_vectors(ell: usize, max_norm: u32) -> Vec<Vec<i64>> {
    let r = max_norm as i64;
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..ell {
        out = out
            .into_iter()
            .flat_map(|v| {
                let used: i64 = v.iter().map(|x: &i64| x.abs()).sum();
                (-(r - used)..=(r - used)).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.sort_by_key(|v| (v.iter().map(|x| x.abs()).sum::<i64>(), v.clone()));
    out
}

/// An oscillating perturbation together with warnings about resonances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorySpec {
    pub spec: PerturbationSpec,
    pub theta: f64,
    pub warnings: Vec<String>,
}

/// `c cos(2πθn + φ) / n^γ` on `target`, with `θ` given directly or as
/// `k·ω`. Only the first `ℓ` entries of `omega` are used; `γ` must lie in
/// `(1/2, 1]`.
pub fn oscillatory_spec(
    omega: &[f64],
    frequency: &Frequency,
    amplitude: f64,
    decay: f64,
    phase: f64,
    target: Target,
) -> Result<OscillatorySpec> {
    if !(decay > 0.5 && decay <= 1.0) {
        return Err(Error::InvalidPerturbation(format!("decay must lie in (1/2, 1], got {decay}")));
    }
    let theta = match frequency {
        Frequency::Value(t) => *t,
        Frequency::Harmonic(k) => {
            if k.len() != omega.len() {
                return Err(Error::InvalidPerturbation(format!(
                    "frequency vector has {} entries for {} gaps",
                    k.len(),
                    omega.len()
                )));
            }
            k_frequency(k, omega)
        }
    };
    let spec = PerturbationSpec::new(Shape::Oscillatory { frequency: theta, amplitude, decay, phase }, target)?;
    let warnings = k_vectors(omega.len(), DEFAULT_K_NORM)
        .into_iter()
        .filter(|k| {
            let f = k_frequency(k, omega);
            dist_mod_one(theta - f) < RESONANCE_TOL || dist_mod_one(theta + f) < RESONANCE_TOL
        })
        .map(|k| format!("θ = {theta} matches ±k·ω for k = {k:?}; the Fourier sum at that k diverges"))
        .collect();
    Ok(OscillatorySpec { spec, theta, warnings })
}

/// Status of the Fourier partial sums at one `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCondition {
    pub k: Vec<i64>,
    pub frequency: f64,
    pub a: ComplexSeriesDiagnostics,
    pub b: ComplexSeriesDiagnostics,
    /// `sup_N |Σ_a| + |Σ_b|` over the computed range.
    pub sup: f64,
    pub verdict: Verdict,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryReport {
    pub terms: usize,
    pub tolerance: f64,
    /// `Σ δa² + δb²` over the computed range.
    pub l2_partial: f64,
    /// Bound on the `ℓ²` tail beyond `terms`, when one is available.
    pub l2_tail_bound: Option<f64>,
    pub l2_verdict: Verdict,
    pub conditions: Vec<FourierCondition>,
    /// Overall status of the partial-sum limits over the tested `k`.
    pub limits_verdict: Verdict,
    /// `(|k|, max sup over that norm)`.
    pub sup_by_norm: Vec<(u32, f64)>,
    /// `max_{|k| > 0} log(sup_k / sup_0) / |k|`; small values are consistent
    /// with subexponential growth.
    pub sup_growth_rate: f64,
}

/// Resonant coefficient of `Σ e^{2πiψn} c cos(2πθn + φ)/n^γ`: nonzero iff
/// the partial sums grow like `Σ n^{-γ}`.
fn resonant_coefficient(shape: &Shape, psi: f64) -> Complex64 {
    let Shape::Oscillatory { frequency, amplitude, phase, .. } = *shape else {
        return Complex64::new(0.0, 0.0);
    };
    let mut c = Complex64::new(0.0, 0.0);
    if dist_mod_one(psi + frequency) < RESONANCE_TOL {
        c += 0.5 * amplitude * Complex64::from_polar(1.0, phase);
    }
    if dist_mod_one(psi - frequency) < RESONANCE_TOL {
        c += 0.5 * amplitude * Complex64::from_polar(1.0, -phase);
    }
    c
}

/// Evaluates the square-summability and Fourier partial-sum conditions for
/// `spec` over `ks` using `terms` sites.
pub fn oscillatory_conditions(
    spec: &PerturbationSpec,
    omega: &[f64],
    ks: &[Vec<i64>],
    terms: usize,
    tol: f64,
) -> Result<OscillatoryReport> {
    spec.validate()?;
    if ks.iter().any(|k| k.len() != omega.len()) {
        return Err(Error::InvalidPerturbation("every k must have one entry per gap".into()));
    }
    let (da, db) = spec.deltas(terms);
    let l2_partial: f64 = da.iter().zip(&db).map(|(x, y)| x * x + y * y).sum();
    let l2_tail_bound = match spec.shape {
        Shape::Oscillatory { amplitude, decay, .. } if 2.0 * decay > 1.0 => {
            let per = if spec.target == Target::Both { 2.0 } else { 1.0 };
            Some(per * amplitude * amplitude * (terms as f64).powf(1.0 - 2.0 * decay) / (2.0 * decay - 1.0))
        }
        Shape::SingleSite { index, .. } if index <= terms => Some(0.0),
        _ => None,
    };
    let l2_verdict = match l2_tail_bound {
        Some(t) if t <= tol => Verdict::Convergent,
        _ => Verdict::Inconclusive,
    };

    let decay = match spec.shape {
        Shape::Oscillatory { decay, .. } => Some(decay),
        _ => None,
    };
    let conditions: Vec<FourierCondition> = ks
        .iter()
        .map(|k| {
            let psi = k_frequency(k, omega);
            let phase = |n: usize| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * psi * (n + 1) as f64);
            let ta: Vec<Complex64> = da.iter().enumerate().map(|(n, d)| phase(n) * d).collect();
            let tb: Vec<Complex64> = db.iter().enumerate().map(|(n, d)| phase(n) * d).collect();
            let a = diagnose_complex(&ta, tol);
            let b = diagnose_complex(&tb, tol);
            let mut sa = Complex64::new(0.0, 0.0);
            let mut sb = Complex64::new(0.0, 0.0);
            let mut sup = 0.0f64;
            for (x, y) in ta.iter().zip(&tb) {
                sa += x;
                sb += y;
                sup = sup.max(sa.norm() + sb.norm());
            }
            let res = resonant_coefficient(&spec.shape, psi);
            let (verdict, reason) = if res.norm() > 0.0 && decay.is_some_and(|g| g <= 1.0) {
                (Verdict::Divergent, format!("resonant term {:.3e}/n^γ with γ ≤ 1", res.norm()))
            } else if a.verdict == Verdict::Convergent && b.verdict == Verdict::Convergent {
                (Verdict::Convergent, format!("both partial sums Cauchy, errors {:.2e}, {:.2e}", a.error, b.error))
            } else {
                (Verdict::Inconclusive, format!("partial-sum errors {:.2e}, {:.2e}", a.error, b.error))
            };
            FourierCondition { k: k.clone(), frequency: psi, a, b, sup, verdict, reason }
        })
        .collect();

    let limits_verdict = if conditions.iter().any(|c| c.verdict == Verdict::Divergent) {
        Verdict::Divergent
    } else if conditions.iter().all(|c| c.verdict == Verdict::Convergent) {
        Verdict::Convergent
    } else {
        Verdict::Inconclusive
    };
    let norm = |k: &[i64]| k.iter().map(|x| x.unsigned_abs() as u32).sum::<u32>();
    let mut sup_by_norm: Vec<(u32, f64)> = Vec::new();
    for c in &conditions {
        let r = norm(&c.k);
        match sup_by_norm.iter_mut().find(|(q, _)| *q == r) {
            Some(entry) => entry.1 = entry.1.max(c.sup),
            None => sup_by_norm.push((r, c.sup)),
        }
    }
    sup_by_norm.sort_by_key(|(r, _)| *r);
    let base = conditions.iter().map(|c| c.sup).fold(f64::INFINITY, f64::min);
    let sup_growth_rate = conditions
        .iter()
        .filter(|c| norm(&c.k) > 0 && base > 0.0)
        .map(|c| (c.sup / base).ln() / norm(&c.k) as f64)
        .fold(0.0, f64::max);
    Ok(OscillatoryReport {
        terms,
        tolerance: tol,
        l2_partial,
        l2_tail_bound,
        l2_verdict,
        conditions,
        limits_verdict,
        sup_by_norm,
        sup_growth_rate,
    })
}
