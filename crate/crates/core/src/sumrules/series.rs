//! Convergence diagnostics for partial sums.
//!
//! An infinite sum is declared finite only when its partial sums settle
//! under doubling to within a tolerance, and divergent only when a divergent
//! minorant is exhibited. Everything else is inconclusive.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

/// How a series was summarised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    /// Terms of one sign: doubling increments extrapolated geometrically.
    Monotone,
    /// Sign changes: midpoint of the range of partial sums on `[K/2, K]`.
    Oscillating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    pub terms: usize,
    pub partial: f64,
    pub partial_half: f64,
    pub partial_quarter: f64,
    /// `max_{K/2 ≤ k ≤ K} |S_k - S_K|`.
    pub oscillation: f64,
    pub mode: SeriesMode,
    /// Best estimate of the limit.
    pub value: f64,
    /// Uncertainty of `value`.
    pub error: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSeriesDiagnostics {
    pub terms: usize,
    pub partial: Complex64,
    pub oscillation: f64,
    /// `sup_k |S_k|` over all computed partial sums.
    pub sup: f64,
    pub value: Complex64,
    pub error: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub reason: String,
}

fn prefix_sums(terms: &[f64]) -> Vec<f64> {
    let mut s = Vec::with_capacity(terms.len() + 1);
    let mut acc = 0.0;
    s.push(0.0);
    for t in terms {
        acc += t;
        s.push(acc);
    }
    s
}

/// Terms of one sign on `[K/4, K]` with `n·|t_n|` non-decreasing across the
/// two halves: the tail is bounded below by a multiple of the harmonic
/// series.
fn harmonic_minorant(terms: &[f64]) -> Option<f64> {
    let k = terms.len();
    if k < 16 {
        return None;
    }
    let window = &terms[k / 4..];
    let positive = window.iter().all(|t| *t > 0.0);
    let negative = window.iter().all(|t| *t < 0.0);
    if !positive && !negative {
        return None;
    }
    let scaled = |lo: usize, hi: usize| (lo..hi).map(|i| (i + 1) as f64 * terms[i].abs()).fold(f64::INFINITY, f64::min);
    let first = scaled(k / 4, k / 2);
    let second = scaled(k / 2, k);
    (second >= first * (1.0 - 1e-12) && second > 0.0).then_some(second)
}

fn geometric_limit(s: &[f64], k: usize) -> Option<f64> {
    if k < 4 {
        return None;
    }
    let d1 = s[k] - s[k / 2];
    let d2 = s[k / 2] - s[k / 4];
    if d1 == 0.0 {
        return Some(s[k]);
    }
    let rho = d1 / d2;
    if !(rho > 0.0 && rho < 0.95) {
        return None;
    }
    Some(s[k] + d1 * rho / (1.0 - rho))
}

/// Diagnoses `Σ terms`. Requires at least 16 terms for a verdict.
pub fn diagnose(terms: &[f64], tol: f64) -> SeriesDiagnostics {
    let k = terms.len();
    let s = prefix_sums(terms);
    let partial = s[k];
    let oscillation = s[k / 2..=k].iter().map(|v| (v - partial).abs()).fold(0.0, f64::max);
    let window = &terms[k / 4..];
    let one_sign = window.iter().all(|t| *t >= 0.0) || window.iter().all(|t| *t <= 0.0);
    let mut out = SeriesDiagnostics {
        terms: k,
        partial,
        partial_half: s[k / 2],
        partial_quarter: s[k / 4],
        oscillation,
        mode: if one_sign { SeriesMode::Monotone } else { SeriesMode::Oscillating },
        value: partial,
        error: f64::INFINITY,
        tolerance: tol,
        verdict: Verdict::Inconclusive,
        reason: String::new(),
    };
    if k < 16 {
        out.reason = format!("only {k} terms");
        return out;
    }
    if let Some(c) = harmonic_minorant(terms) {
        out.verdict = Verdict::Divergent;
        out.reason = format!("terms bounded below by {c:.3e}/n on [{}, {k}]", k / 4 + 1);
        return out;
    }
    if one_sign {
        match (geometric_limit(&s, k), geometric_limit(&s, k / 2)) {
            (Some(a), Some(b)) => {
                out.value = a;
                out.error = (a - b).abs();
            }
            _ if oscillation == 0.0 => {
                out.value = partial;
                out.error = 0.0;
            }
            _ => {
                out.reason = "doubling increments do not contract".into();
                return out;
            }
        }
    } else {
        let (lo, hi) =
            s[k / 2..=k].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        out.value = 0.5 * (lo + hi);
        out.error = 0.5 * (hi - lo);
    }
    if out.error <= tol {
        out.verdict = Verdict::Convergent;
        out.reason = format!("Cauchy under doubling, error {:.2e}", out.error);
    } else {
        out.reason = format!("error {:.2e} above tolerance {tol:.1e}", out.error);
    }
    out
}

/// Complex analogue of [`diagnose`] (range of partial sums on `[K/2, K]`).
/// Divergence is never inferred from data; callers with a certified
/// minorant set it themselves.
pub fn diagnose_complex(terms: &[Complex64], tol: f64) -> ComplexSeriesDiagnostics {
    let k = terms.len();
    let mut s = Vec::with_capacity(k + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    s.push(acc);
    for t in terms {
        acc += t;
        s.push(acc);
    }
    let partial = s[k];
    let sup = s.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let oscillation = s[k / 2..].iter().map(|v| (v - partial).norm()).fold(0.0, f64::max);
    let (mut re_lo, mut re_hi, mut im_lo, mut im_hi) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for v in &s[k / 2..] {
        re_lo = re_lo.min(v.re);
        re_hi = re_hi.max(v.re);
        im_lo = im_lo.min(v.im);
        im_hi = im_hi.max(v.im);
    }
    let value = Complex64::new(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
    let error = 0.5 * (re_hi - re_lo).hypot(im_hi - im_lo);
    let (verdict, reason) = if k < 16 {
        (Verdict::Inconclusive, format!("only {k} terms"))
    } else if error <= tol {
        (Verdict::Convergent, format!("Cauchy under doubling, error {error:.2e}"))
    } else {
        (Verdict::Inconclusive, format!("error {error:.2e} above tolerance {tol:.1e}"))
    };
    ComplexSeriesDiagnostics { terms: k, partial, oscillation, sup, value, error, tolerance: tol, verdict, reason }
}

/// Doubles the number of terms from `start` until [`diagnose`] reaches a
/// verdict other than inconclusive or `max_terms` is hit.
pub fn diagnose_adaptive<F>(term: F, start: usize, max_terms: usize, tol: f64) -> SeriesDiagnostics
where
    F: Fn(usize) -> f64,
{
    let mut k = start.max(16);
    let mut terms: Vec<f64> = (1..=k).map(&term).collect();
    loop {
        let d = diagnose(&terms, tol);
        if d.verdict != Verdict::Inconclusive || 2 * k > max_terms {
            return d;
        }
        terms.extend((k + 1..=2 * k).map(&term));
        k *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_two() {
        let d = diagnose_adaptive(|n| 1.0 / (n * n) as f64, 64, 1 << 20, 1e-7);
        assert_eq!(d.verdict, Verdict::Convergent);
        assert!((d.value - PI * PI / 6.0).abs() < 1e-6, "{}", d.value);
    }

    #[test]
    fn harmonic_is_divergent() {
        let terms: Vec<f64> = (1..=4096).map(|n| 1.0 / n as f64).collect();
        assert_eq!(diagnose(&terms, 1e-6).verdict, Verdict::Divergent);
        let terms: Vec<f64> = (1..=4096).map(|n| (n as f64).powf(-0.8)).collect();
        assert_eq!(diagnose(&terms, 1e-6).verdict, Verdict::Divergent);
        let terms: Vec<f64> = (1..=4096).map(|n| (n as f64).powf(-1.1)).collect();
        assert_eq!(diagnose(&terms, 1e-6).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn alternating() {
        let terms: Vec<f64> = (1..=4096).map(|n| (-1f64).powi(n) / n as f64).collect();
        let d = diagnose(&terms, 1e-3);
        assert_eq!(d.mode, SeriesMode::Oscillating);
        assert_eq!(d.verdict, Verdict::Convergent);
        assert!((d.value + 2f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn trivial() {
        let d = diagnose(&[0.0; 64], 1e-12);
        assert_eq!(d.verdict, Verdict::Convergent);
        assert_eq!(d.value, 0.0);
        assert_eq!(diagnose(&[1.0; 4], 1.0).verdict, Verdict::Inconclusive);
        let c = diagnose_complex(&[Complex64::new(0.0, 0.0); 64], 1e-12);
        assert_eq!(c.verdict, Verdict::Convergent);
    }
}
