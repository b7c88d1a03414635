//! Sturm-sequence bisection for symmetric tridiagonal matrices.

use crate::bandset::FiniteGapSet;

/// Number of eigenvalues strictly below `lambda` of the symmetric
/// tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - lambda - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (1.0 + lambda.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin enclosure of the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i < off.len() { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// All eigenvalues in the open interval `(lo, hi)`, ascending.
pub fn eigenvalues_in(diag: &[f64], off: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let below_lo = sturm_count(diag, off, lo);
    let below_hi = sturm_count(diag, off, hi);
    (below_lo..below_hi)
        .map(|idx| {
            // idx-th eigenvalue (0-based): smallest λ with count(λ) > idx
            let mut a = lo;
            let mut b = hi;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, off, mid) > idx {
                    b = mid;
                } else {
                    a = mid;
                }
                if b - a <= 4.0 * f64::EPSILON * (1.0 + mid.abs()) {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Eigenvalues lying outside `e`, ascending.
pub fn eigenvalues_outside(diag: &[f64], off: &[f64], e: &FiniteGapSet) -> Vec<f64> {
    if diag.is_empty() {
        return Vec::new();
    }
    let (glo, ghi) = gershgorin(diag, off);
    let [h0, h1] = e.hull();
    let mut out = Vec::new();
    if glo < h0 {
        out.extend(eigenvalues_in(diag, off, glo - 1.0, h0));
    }
    for g in e.gaps() {
        out.extend(eigenvalues_in(diag, off, g[0], g[1]));
    }
    if ghi > h1 {
        out.extend(eigenvalues_in(diag, off, h1, ghi + 1.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_truncation_spectrum() {
        let n = 50;
        let diag = vec![0.0; n];
        let off = vec![1.0; n - 1];
        let all = eigenvalues_in(&diag, &off, -3.0, 3.0);
        assert_eq!(all.len(), n);
        for (k, lam) in all.iter().rev().enumerate() {
            let exact = 2.0 * (PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((lam - exact).abs() < 1e-12);
        }
        let e = FiniteGapSet::new(&[-2.0, 2.0]).unwrap();
        assert!(eigenvalues_outside(&diag, &off, &e).is_empty());
    }

    #[test]
    fn one_by_one() {
        assert_eq!(eigenvalues_in(&[0.5], &[], -1.0, 1.0).len(), 1);
        assert!((eigenvalues_in(&[0.5], &[], -1.0, 1.0)[0] - 0.5).abs() < 1e-15);
    }
}
