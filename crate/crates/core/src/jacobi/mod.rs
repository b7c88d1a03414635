//! Jacobi parameters, orthonormal polynomials, truncation spectra and
//! m-functions.
//!
//! Indexing follows the half-line convention
//! `(Ju)_n = a_n u_{n+1} + b_n u_n + a_{n-1} u_{n-1}`, `u_0 = 0`, with
//! coefficients numbered from 1.

pub mod measure;
pub mod strip;
pub mod tridiag;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bandset::FiniteGapSet;
use crate::error::{Error, Result};

pub use measure::{m_from_measure, BandDensity, PointMass, SpectralMeasure};
pub use strip::{strip_coefficients, strip_raw, Stripped};

/// How coefficients continue past the explicit head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tail {
    /// `a_n = 1`, `b_n = 0`.
    Free,
    /// `a_n = a[(n-1) mod p]`, `b_n = b[(n-1) mod p]`.
    Periodic { a: Vec<f64>, b: Vec<f64> },
    /// Recursion coefficients of a measure (torus points, measure-driven
    /// families); extended by restripping.
    Measure(Arc<SpectralMeasure>),
    /// No continuation; only the head exists.
    Truncated,
}

/// One-sided Jacobi parameters: an explicit head plus a tail descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsJson", into = "ParamsJson")]
pub struct JacobiParams {
    a: Vec<f64>,
    b: Vec<f64>,
    tail: Tail,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsJson {
    head_a: Vec<f64>,
    head_b: Vec<f64>,
    tail: Tail,
}

impl TryFrom<ParamsJson> for JacobiParams {
    type Error = Error;

    fn try_from(j: ParamsJson) -> Result<Self> {
        JacobiParams::new(j.head_a, j.head_b, j.tail)
    }
}

impl From<JacobiParams> for ParamsJson {
    fn from(p: JacobiParams) -> Self {
        ParamsJson { head_a: p.a, head_b: p.b, tail: p.tail }
    }
}

impl JacobiParams {
    pub fn new(a: Vec<f64>, b: Vec<f64>, tail: Tail) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidParams(format!("head lengths differ: {} vs {}", a.len(), b.len())));
        }
        if let Some(n) = a.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParams(format!("a_{} = {} is not a positive finite number", n + 1, a[n])));
        }
        if let Some(n) = b.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!("b_{} is not finite", n + 1)));
        }
        if let Tail::Periodic { a: pa, b: pb } = &tail {
            if pa.is_empty() || pa.len() != pb.len() {
                return Err(Error::InvalidParams("periodic tail needs equal, non-empty periods".into()));
            }
            if pa.iter().any(|x| !(*x > 0.0) || !x.is_finite()) || pb.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParams("periodic tail has invalid entries".into()));
            }
        }
        Ok(Self { a, b, tail })
    }

    /// The free Jacobi matrix `a ≡ 1, b ≡ 0`.
    pub fn free() -> Self {
        Self { a: Vec::new(), b: Vec::new(), tail: Tail::Free }
    }

    pub fn head_len(&self) -> usize {
        self.a.len()
    }

    pub fn head_a(&self) -> &[f64] {
        &self.a
    }

    pub fn head_b(&self) -> &[f64] {
        &self.b
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// `(a_n, b_n)` for `1 ≤ n ≤ head_len` or any `n` for free/periodic tails.
    pub fn coeff(&self, n: usize) -> Option<(f64, f64)> {
        assert!(n >= 1, "coefficients are indexed from 1");
        if n <= self.a.len() {
            return Some((self.a[n - 1], self.b[n - 1]));
        }
        match &self.tail {
            Tail::Free => Some((1.0, 0.0)),
            Tail::Periodic { a, b } => {
                let k = (n - 1) % a.len();
                Some((a[k], b[k]))
            }
            Tail::Measure(_) | Tail::Truncated => None,
        }
    }

    /// Materialises `(a_1..a_n, b_1..b_n)`.
    pub fn coefficients(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if n <= self.a.len() {
            return Ok((self.a[..n].to_vec(), self.b[..n].to_vec()));
        }
        match &self.tail {
            Tail::Free | Tail::Periodic { .. } => {
                let (a, b) = (1..=n).map(|k| self.coeff(k).expect("free/periodic tails are total")).unzip();
                Ok((a, b))
            }
            Tail::Measure(measure) => {
                let s = strip::strip_raw(measure, n)?;
                let mut a = s.a;
                let mut b = s.b;
                a[..self.a.len()].copy_from_slice(&self.a);
                b[..self.b.len()].copy_from_slice(&self.b);
                Ok((a, b))
            }
            Tail::Truncated => Err(Error::Unavailable { requested: n, available: self.a.len() }),
        }
    }

    /// Same parameters with at least `n` coefficients in the head.
    pub fn extended(&self, n: usize) -> Result<Self> {
        if n <= self.a.len() {
            return Ok(self.clone());
        }
        let (a, b) = self.coefficients(n)?;
        Ok(Self { a, b, tail: self.tail.clone() })
    }

    /// Replaces the head with the given arrays (tail kept).
    pub fn with_head(&self, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(a, b, self.tail.clone())
    }

    /// Coefficients `(a_{k+1}, b_{k+1}), …` as a new head-only sequence of
    /// length `len` (the `k`-times stripped matrix).
    pub fn shifted(&self, k: usize, len: usize) -> Result<Self> {
        let (a, b) = self.coefficients(k + len)?;
        Self::new(a[k..].to_vec(), b[k..].to_vec(), Tail::Truncated)
    }
}

/// `p_0(z), …, p_n(z)` from
/// `a_{k+1} p_{k+1} = (z - b_{k+1}) p_k - a_k p_{k-1}`.
pub fn oprl_eval(j: &JacobiParams, n: usize, z: Complex64) -> Result<Vec<Complex64>> {
    let (a, b) = j.coefficients(n)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex64::new(1.0, 0.0));
    let mut prev = Complex64::new(0.0, 0.0);
    let mut a_prev = 0.0;
    for k in 0..n {
        let next = ((z - b[k]) * out[k] - prev * a_prev) / a[k];
        prev = out[k];
        a_prev = a[k];
        out.push(next);
    }
    Ok(out)
}

/// `mantissa · exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `log(self)` on the principal branch of the mantissa.
    pub fn ln(&self) -> Complex64 {
        self.mantissa.ln() + self.log_scale
    }

    /// `self / other` without overflow.
    pub fn ratio(&self, other: &ScaledComplex) -> Complex64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

/// [`oprl_eval`] with a running exponent so `p_n` is representable for
/// large `n` off the spectrum.
pub fn oprl_eval_scaled(j: &JacobiParams, n: usize, z: Complex64) -> Result<Vec<ScaledComplex>> {
    let (a, b) = j.coefficients(n)?;
    Ok(oprl_scaled_from(&a, &b, n, z))
}

pub(crate) fn oprl_scaled_from(a: &[f64], b: &[f64], n: usize, z: Complex64) -> Vec<ScaledComplex> {
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = Complex64::new(1.0, 0.0);
    let mut prev = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    out.push(ScaledComplex { mantissa: cur, log_scale: 0.0 });
    let mut a_prev = 0.0;
    for k in 0..n {
        let next = ((z - b[k]) * cur - prev * a_prev) / a[k];
        prev = cur;
        cur = next;
        a_prev = a[k];
        let mag = cur.norm();
        if mag > 1e100 || (mag < 1e-100 && mag > 0.0) {
            let s = mag.ln();
            cur /= mag;
            prev /= mag;
            scale += s;
        }
        out.push(ScaledComplex { mantissa: cur, log_scale: scale });
    }
    out
}

/// Eigenvalues of the `n × n` truncation that lie outside `e`.
pub fn truncation_eigs_raw(j: &JacobiParams, e: &FiniteGapSet, n: usize) -> Result<Vec<f64>> {
    let (a, b) = j.coefficients(n)?;
    Ok(tridiag::eigenvalues_outside(&b, &a[..n - 1], e))
}

/// Tolerance of the truncation stability filter.
pub const TRUNCATION_STABILITY_TOL: f64 = 1e-6;

/// Eigenvalues of the `n × n` truncation outside `e` that are stable:
/// each must reappear within [`TRUNCATION_STABILITY_TOL`] in the `n/2` and
/// the `n - 1` truncations. Gap eigenvalues produced by the cut-off move
/// with the truncation point and are discarded.
pub fn truncation_eigenvalues_outside(j: &JacobiParams, e: &FiniteGapSet, n: usize) -> Result<Vec<f64>> {
    if n < 4 {
        return Err(Error::InvalidParams(format!("truncation size {n} is too small (need ≥ 4)")));
    }
    let j = j.extended(n)?;
    let full = truncation_eigs_raw(&j, e, n)?;
    let half = truncation_eigs_raw(&j, e, n / 2)?;
    let shifted = truncation_eigs_raw(&j, e, n - 1)?;
    let near = |set: &[f64], x: f64| set.iter().any(|y| (x - y).abs() < TRUNCATION_STABILITY_TOL);
    Ok(full.into_iter().filter(|&x| near(&half, x) && near(&shifted, x)).collect())
}

/// `max_{k ≤ n} ‖T_k(λ) ⋯ T_1(λ)‖` for the one-step transfer matrices
/// `T_k = [[(λ - b_k)/a_k, -a_{k-1}/a_k], [1, 0]]`, `a_0 = 1`.
/// Returned as a natural logarithm so exponential growth does not overflow.
pub fn transfer_growth_log(j: &JacobiParams, lambda: f64, n: usize) -> Result<f64> {
    let (a, b) = j.coefficients(n)?;
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let mut log_scale = 0.0f64;
    let mut best = 0.0f64;
    let mut a_prev = 1.0;
    for k in 0..n {
        let t = [[(lambda - b[k]) / a[k], -a_prev / a[k]], [1.0, 0.0]];
        m = [[t[0][0] * m[0][0] + t[0][1] * m[1][0], t[0][0] * m[0][1] + t[0][1] * m[1][1]], [m[0][0], m[0][1]]];
        a_prev = a[k];
        let norm = spectral_norm(&m);
        best = best.max(norm.ln() + log_scale);
        if norm > 1e50 {
            for row in m.iter_mut() {
                for v in row.iter_mut() {
                    *v /= norm;
                }
            }
            log_scale += norm.ln();
        }
    }
    Ok(best)
}

/// [`transfer_growth_log`] exponentiated (may be `inf`).
pub fn transfer_growth(j: &JacobiParams, lambda: f64, n: usize) -> Result<f64> {
    Ok(transfer_growth_log(j, lambda, n)?.exp())
}

fn spectral_norm(m: &[[f64; 2]; 2]) -> f64 {
    let s = m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (s + disc)).sqrt()
}

/// Value of a Herglotz function or Green's function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HerglotzValue {
    Finite(Complex64),
    Pole,
}

impl HerglotzValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            HerglotzValue::Finite(v) => Some(v),
            HerglotzValue::Pole => None,
        }
    }

    fn inv(self) -> Complex64 {
        match self {
            HerglotzValue::Finite(v) => v.inv(),
            HerglotzValue::Pole => Complex64::new(0.0, 0.0),
        }
    }
}

fn neg_inv(den: Complex64) -> HerglotzValue {
    if den.norm() == 0.0 || !den.is_finite() {
        if den.is_infinite() {
            return HerglotzValue::Finite(Complex64::new(0.0, 0.0));
        }
        return HerglotzValue::Pole;
    }
    HerglotzValue::Finite(-den.inv())
}

/// Diagonal Green's function of a two-sided matrix from its half-line
/// m-functions: `G_00 = -(a_0² m_+ - m_-^{-1})^{-1}`.
pub fn g00(a0: f64, m_plus: HerglotzValue, m_minus: HerglotzValue) -> HerglotzValue {
    let mp = match m_plus {
        HerglotzValue::Finite(v) => v,
        HerglotzValue::Pole => return HerglotzValue::Finite(Complex64::new(0.0, 0.0)),
    };
    neg_inv(a0 * a0 * mp - m_minus.inv())
}

/// The same Green's function from the shifted left half-line:
/// `G_00 = -(z - b_0 + a_0² m_+ + a_{-1}² m̃_-)^{-1}`.
pub fn g00_shifted(
    z: Complex64,
    b0: f64,
    a0: f64,
    a_minus1: f64,
    m_plus: HerglotzValue,
    m_tilde_minus: HerglotzValue,
) -> HerglotzValue {
    match (m_plus, m_tilde_minus) {
        (HerglotzValue::Finite(mp), HerglotzValue::Finite(mm)) => {
            neg_inv(z - b0 + a0 * a0 * mp + a_minus1 * a_minus1 * mm)
        }
        _ => HerglotzValue::Finite(Complex64::new(0.0, 0.0)),
    }
}
