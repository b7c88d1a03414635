//! Individual sum-rule quantities: eigenvalue sums, Szegő-type integrals,
//! coefficient products and sums, polynomial ratios.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series::{diagnose, SeriesDiagnostics};
use crate::bandset::FiniteGapSet;
use crate::error::{Error, Result};
use crate::jacobi::{oprl_scaled_from, truncation_eigenvalues_outside, JacobiParams, SpectralMeasure, Tail};
use crate::quadrature;

/// `Σ dist(x_n, e)^p`.
pub fn lt_sum(evs: &[f64], e: &FiniteGapSet, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("eigenvalue sum power must be positive, got {p}")));
    }
    Ok(evs.iter().map(|&x| e.dist_to_set(x).powf(p)).sum())
}

/// `Σ (x_n² - 4)^{1/2}` over eigenvalues outside `[-2, 2]`.
pub fn lt_free_form(evs: &[f64]) -> f64 {
    evs.iter().filter(|x| x.abs() > 2.0).map(|x| (x * x - 4.0).sqrt()).sum()
}

/// `C_0 = Σ_j |gap_j / 2|^{1/2}`.
pub fn lt_c0(e: &FiniteGapSet) -> f64 {
    e.gaps().iter().map(|g| (0.5 * (g[1] - g[0])).abs().sqrt()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtFreeBound {
    pub truncation: usize,
    pub eigenvalues: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Slack allowed in the comparison of the two sides.
pub const LT_SLACK: f64 = 1e-6;

/// `Σ (x_n² - 4)^{1/2} ≤ Σ |b_n| + 4 Σ |a_n - 1|` for a finitely supported
/// perturbation of the free matrix, eigenvalues from `truncation`-size
/// truncations.
pub fn lt_free_bound(j: &JacobiParams, truncation: usize) -> Result<LtFreeBound> {
    if *j.tail() != Tail::Free {
        return Err(Error::InvalidParams("the free-case bound needs a free tail".into()));
    }
    let e = FiniteGapSet::new(&[-2.0, 2.0])?;
    let eigenvalues = truncation_eigenvalues_outside(j, &e, truncation.max(2 * j.head_len()))?;
    let lhs = lt_free_form(&eigenvalues);
    let rhs =
        j.head_b().iter().map(|b| b.abs()).sum::<f64>() + 4.0 * j.head_a().iter().map(|a| (a - 1.0).abs()).sum::<f64>();
    Ok(LtFreeBound { truncation, eigenvalues, lhs, rhs, holds: lhs <= rhs + LT_SLACK })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtFiniteGap {
    pub truncation: usize,
    pub eigenvalues: Vec<f64>,
    pub lhs: f64,
    pub c0: f64,
    /// `Σ |a_n - ã_n| + |b_n - b̃_n|` over the truncation.
    pub l1_distance: f64,
    /// `(lhs - C_0) / l1_distance`, the smallest constant that works here.
    pub ratio: f64,
}

/// Critical eigenvalue sum for `J` against a reference `J̃` on the torus.
pub fn lt_finite_gap(
    j: &JacobiParams,
    reference: &JacobiParams,
    e: &FiniteGapSet,
    truncation: usize,
) -> Result<LtFiniteGap> {
    let eigenvalues = truncation_eigenvalues_outside(j, e, truncation)?;
    let lhs = lt_sum(&eigenvalues, e, 0.5)?;
    let c0 = lt_c0(e);
    let (a, b) = j.coefficients(truncation)?;
    let (ra, rb) = reference.coefficients(truncation)?;
    let l1_distance: f64 = (0..truncation).map(|k| (a[k] - ra[k]).abs() + (b[k] - rb[k]).abs()).sum();
    let ratio = if l1_distance > 0.0 { (lhs - c0) / l1_distance } else { 0.0 };
    Ok(LtFiniteGap { truncation, eigenvalues, lhs, c0, l1_distance, ratio })
}

/// Weight in front of `log f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SzegoWeight {
    /// `dist(x, ℝ∖e)^s`.
    Distance,
    /// `((x - α)(β - x))^s` on a single band `[α, β]`.
    Interval,
}

pub const SZEGO_TOL: f64 = 1e-10;

/// `∫_e w(x)^s log f(x) dx`; `-∞` when `f` vanishes on a subinterval.
pub fn szego_integral(mu: &SpectralMeasure, weight: SzegoWeight, exponent: f64) -> Result<f64> {
    let set = mu.set();
    if weight == SzegoWeight::Interval && set.band_count() != 1 {
        return Err(Error::Domain("the interval weight needs a single band".into()));
    }
    if mu.band_densities().iter().any(|b| b.dead_intervals().iter().any(|d| d[1] > d[0])) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut total = 0.0;
    for j in 0..set.band_count() {
        let iv = set.band_interval(j);
        let len = iv.hi - iv.lo;
        let half = 0.5 * len;
        let w = |dl: f64, dr: f64| match weight {
            SzegoWeight::Distance => dl.min(dr).powf(exponent),
            SzegoWeight::Interval => (dl * dr).powf(exponent),
        };
        let left = quadrature::tanh_sinh(
            |s, t| {
                let (dl, dr) = (s, half + t);
                w(dl, dr) * mu.log_density_at(j, dl, dr)
            },
            half,
            SZEGO_TOL,
        );
        let right = quadrature::tanh_sinh(
            |s, t| {
                let (dl, dr) = (half + s, t);
                w(dl, dr) * mu.log_density_at(j, dl, dr)
            },
            half,
            SZEGO_TOL,
        );
        let map = |r: Result<f64>| {
            r.map_err(|err| match err {
                Error::Numerical(m) => {
                    Error::InvalidMeasure(format!("log-density is not finite on band {}: {m}", j + 1))
                }
                other => other,
            })
        };
        total += map(left)? + map(right)?;
    }
    Ok(total)
}

/// Normalisation of a coefficient product.
#[derive(Debug, Clone, Copy)]
pub enum ProductReference<'a> {
    /// `a_1⋯a_n / C^n`.
    Capacity(f64),
    /// `a_1⋯a_n / ã_1⋯ã_n`.
    Params(&'a JacobiParams),
}

/// `log(a_1⋯a_k / reference_k)` for `k = 1..=n`.
pub fn a_product_logs(j: &JacobiParams, reference: ProductReference<'_>, n: usize) -> Result<Vec<f64>> {
    let (a, _) = j.coefficients(n)?;
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    match reference {
        ProductReference::Capacity(c) => {
            if !(c > 0.0) {
                return Err(Error::Domain(format!("capacity {c} must be positive")));
            }
            let lc = c.ln();
            for x in &a {
                acc += x.ln() - lc;
                out.push(acc);
            }
        }
        ProductReference::Params(r) => {
            let (ra, _) = r.coefficients(n)?;
            for (x, y) in a.iter().zip(&ra) {
                acc += (x / y).ln();
                out.push(acc);
            }
        }
    }
    Ok(out)
}

pub fn a_product(j: &JacobiParams, reference: ProductReference<'_>, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    Ok(a_product_logs(j, reference, n)?[n - 1].exp())
}

/// Diagnostics of `Σ_{n ≤ K} (b_n - b̃_n)`.
pub fn b_sum(j: &JacobiParams, reference: &JacobiParams, k: usize, tol: f64) -> Result<SeriesDiagnostics> {
    let (_, b) = j.coefficients(k)?;
    let (_, rb) = reference.coefficients(k)?;
    let terms: Vec<f64> = b.iter().zip(&rb).map(|(x, y)| x - y).collect();
    Ok(diagnose(&terms, tol))
}

/// Diagnostics of `Σ_{n ≤ K} log(a_n / ã_n)`, the log of the relative
/// product.
pub fn a_log_sum(j: &JacobiParams, reference: &JacobiParams, k: usize, tol: f64) -> Result<SeriesDiagnostics> {
    let (a, _) = j.coefficients(k)?;
    let (ra, _) = reference.coefficients(k)?;
    let terms: Vec<f64> = a.iter().zip(&ra).map(|(x, y)| (x / y).ln()).collect();
    Ok(diagnose(&terms, tol))
}

/// Diagnostics of `Σ_{n ≤ K} (a_n - ã_n)² + (b_n - b̃_n)²`.
pub fn ks_l2(j: &JacobiParams, reference: &JacobiParams, k: usize, tol: f64) -> Result<SeriesDiagnostics> {
    let (a, b) = j.coefficients(k)?;
    let (ra, rb) = reference.coefficients(k)?;
    let terms: Vec<f64> = (0..k).map(|i| (a[i] - ra[i]).powi(2) + (b[i] - rb[i]).powi(2)).collect();
    Ok(diagnose(&terms, tol))
}

fn check_off_axis(z: Complex64, what: &str) -> Result<()> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("{what}: evaluation point must be finite")));
    }
    Ok(())
}

/// `p_k(z) / p̃_k(z)` for every `k` in `ns`.
pub fn szego_ratios(j: &JacobiParams, reference: &JacobiParams, z: Complex64, ns: &[usize]) -> Result<Vec<Complex64>> {
    check_off_axis(z, "ratio")?;
    let n = ns.iter().copied().max().unwrap_or(0);
    let (a, b) = j.coefficients(n)?;
    let (ra, rb) = reference.coefficients(n)?;
    let p = oprl_scaled_from(&a, &b, n, z);
    let q = oprl_scaled_from(&ra, &rb, n, z);
    ns.iter()
        .map(|&k| {
            if q[k].mantissa.norm() == 0.0 {
                return Err(Error::Domain(format!("reference polynomial vanishes at z = {z}")));
            }
            Ok(p[k].ratio(&q[k]))
        })
        .collect()
}

pub fn szego_ratio(j: &JacobiParams, reference: &JacobiParams, z: Complex64, n: usize) -> Result<Complex64> {
    Ok(szego_ratios(j, reference, z, &[n])?[0])
}

/// `½(z + √(z² - 4))` on the branch with modulus above one.
pub fn free_growth(z: Complex64) -> Complex64 {
    let root = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    let a = 0.5 * (z + root);
    let b = 0.5 * (z - root);
    if a.norm() >= b.norm() {
        a
    } else {
        b
    }
}

/// `p_k(z) / (½(z + √(z² - 4)))^k` for every `k` in `ns`.
pub fn szego_ratios_free(j: &JacobiParams, z: Complex64, ns: &[usize]) -> Result<Vec<Complex64>> {
    check_off_axis(z, "ratio")?;
    if z.im == 0.0 && z.re.abs() <= 2.0 {
        return Err(Error::Domain(format!("z = {z} lies on [-2, 2]")));
    }
    let n = ns.iter().copied().max().unwrap_or(0);
    let (a, b) = j.coefficients(n)?;
    let p = oprl_scaled_from(&a, &b, n, z);
    let lg = free_growth(z).ln();
    Ok(ns.iter().map(|&k| (p[k].ln() - lg * k as f64).exp()).collect())
}

pub fn szego_ratio_free(j: &JacobiParams, z: Complex64, n: usize) -> Result<Complex64> {
    Ok(szego_ratios_free(j, z, &[n])?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostCheck {
    /// Coefficient of `1/z` in `log(p_n/p̃_n)` from a contour average.
    pub extracted: f64,
    /// `-Σ_{j ≤ n} (b_j - b̃_j)`.
    pub expected: f64,
    /// Constant term, to compare with `-log(a_1⋯a_n / ã_1⋯ã_n)`.
    pub constant: f64,
    pub expected_constant: f64,
    pub radius: f64,
}

/// Reads the `z⁻¹` term of `log(p_n/p̃_n)` off eight points on `|z| = radius`.
pub fn jost_check(j: &JacobiParams, reference: &JacobiParams, n: usize, radius: f64) -> Result<JostCheck> {
    let (a, b) = j.coefficients(n)?;
    let (ra, rb) = reference.coefficients(n)?;
    let mut first = Complex64::new(0.0, 0.0);
    let mut zeroth = Complex64::new(0.0, 0.0);
    let points = 8;
    for k in 0..points {
        let z = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / points as f64);
        let p = oprl_scaled_from(&a, &b, n, z);
        let q = oprl_scaled_from(&ra, &rb, n, z);
        let l = p[n].ratio(&q[n]).ln();
        first += l * z;
        zeroth += l;
    }
    let expected = -(0..n).map(|k| b[k] - rb[k]).sum::<f64>();
    let expected_constant = -(0..n).map(|k| (a[k] / ra[k]).ln()).sum::<f64>();
    Ok(JostCheck {
        extracted: first.re / points as f64,
        expected,
        constant: zeroth.re / points as f64,
        expected_constant,
        radius,
    })
}
