//! Quadrature and series plumbing shared by the potential-theory and
//! measure code.
//!
//! Every band or gap `[lo, hi]` is parametrised as `x = m + r cos θ`,
//! `θ ∈ (0, π)`. Under this substitution `dx / √|(x-lo)(x-hi)| = dθ`, so the
//! inverse square-root endpoint behaviour of the densities we integrate is
//! absorbed into the Jacobian and the remaining integrands are smooth, even,
//! `2π`-periodic functions of `θ`. The midpoint rule in `θ` (Gauss–Chebyshev)
//! is then spectrally accurate, and cosine coefficients obtained from it give
//! closed forms for Stieltjes transforms and logarithmic potentials.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Midpoint nodes `θ_i = (i + ½)π/n`, `i = 0..n`.
pub fn cosine_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) * PI / n as f64).collect()
}

/// A truncated cosine series `g(θ) = Σ_k c_k cos(kθ)`, equivalently a
/// Chebyshev expansion in `cos θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeries {
    coeffs: Vec<f64>,
}

impl CosineSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut s = Self { coeffs };
        if s.coeffs.is_empty() {
            s.coeffs.push(0.0);
        }
        s
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Discrete cosine transform of samples taken at [`cosine_nodes`].
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        // cos(kθ_i) = cos(π k (2i+1) / 2n), looked up exactly by index
        let period = 4 * n;
        let table: Vec<f64> = (0..period).map(|m| (PI * m as f64 / (2 * n) as f64).cos()).collect();
        let mut coeffs = vec![0.0; n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &f) in samples.iter().enumerate() {
                acc += f * table[(k * (2 * i + 1)) % period];
            }
            *c = acc;
        }
        let scale = 2.0 / n as f64;
        coeffs[0] /= n as f64;
        for c in coeffs.iter_mut().skip(1) {
            *c *= scale;
        }
        Self::new(coeffs)
    }

    /// Samples `f` at successively doubled node counts until the upper half
    /// of the spectrum is below `rel_tol` of the largest coefficient.
    /// Returns the series and the node count used.
    pub fn adaptive<F>(f: F, min_nodes: usize, max_nodes: usize, rel_tol: f64) -> Result<(Self, usize)>
    where
        F: Fn(f64) -> f64,
    {
        let mut n = min_nodes.max(8).next_power_of_two();
        loop {
            let samples: Vec<f64> = cosine_nodes(n).into_iter().map(&f).collect();
            if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite sample {bad} in cosine series")));
            }
            let series = Self::from_samples(&samples);
            let scale = series.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let tail = series.coeffs[n / 2..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let floor = 8.0 * f64::EPSILON * (n as f64).sqrt();
            if tail <= rel_tol.max(floor) * scale || scale == 0.0 {
                return Ok((series.trimmed(rel_tol * 1e-3 * scale), n));
            }
            if n >= max_nodes {
                return Err(Error::Accuracy(format!(
                    "cosine series did not resolve with {n} nodes (tail {tail:e}, scale {scale:e})"
                )));
            }
            n *= 2;
        }
    }

    fn trimmed(mut self, abs_tol: f64) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.abs() <= abs_tol) {
            self.coeffs.pop();
        }
        self
    }

    /// Value at `θ` via Clenshaw's recurrence in `cos θ`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_cos(theta.cos())
    }

    /// Value at `cos θ = t`.
    pub fn eval_cos(&self, t: f64) -> f64 {
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + t * b1 - b2
    }

    /// `∫_0^π g(θ) dθ`.
    pub fn integral(&self) -> f64 {
        PI * self.coeffs[0]
    }

    /// Multiplies by `1 + s·cos θ`, `s = ±1`.
    pub fn mul_one_plus(&self, s: f64) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k] += c;
            out[k.abs_diff(1)] += 0.5 * s * c;
            out[k + 1] += 0.5 * s * c;
        }
        Self::new(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tanh–sinh quadrature of `f` over an interval of length `len`.
///
/// The integrand receives `(distance to left end, distance to right end)`
/// so that endpoint-singular factors can be formed without cancellation.
/// Levels are halved until successive estimates agree to `tol`
/// (absolute plus relative).
pub fn tanh_sinh<F>(f: F, len: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let mut h = 0.5;
    let mut prev: Option<f64> = None;
    for _ in 0..10 {
        let mut sum = 0.0;
        let kmax = (6.5 / h) as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let y = 0.5 * PI * t.sinh();
            let ch = y.cosh();
            let w = 0.5 * len * 0.5 * PI * t.cosh() / (ch * ch);
            if w < 1e-300 {
                continue;
            }
            let dl = len / (1.0 + (-2.0 * y).exp());
            let dr = len / (1.0 + (2.0 * y).exp());
            if dl <= 0.0 || dr <= 0.0 {
                continue;
            }
            let v = f(dl, dr);
            if !v.is_finite() {
                return Err(Error::Numerical(format!("non-finite integrand at distances ({dl:e}, {dr:e})")));
            }
            sum += w * v;
        }
        let est = sum * h;
        if let Some(p) = prev {
            if (est - p).abs() <= tol * (1.0 + est.abs()) {
                return Ok(est);
            }
        }
        prev = Some(est);
        h *= 0.5;
    }
    Err(Error::Accuracy("tanh-sinh quadrature did not converge".into()))
}

/// Dense solve by Gaussian elimination with partial pivoting. `mat` is
/// row-major `n × n`.
pub fn solve_dense(mut mat: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs())).unwrap_or(col);
        if mat[piv][col].abs() < 1e-300 || !mat[piv][col].is_finite() {
            return Err(Error::Numerical(format!("singular {n}x{n} system at column {col}")));
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let factor = mat[row][col] / mat[col][col];
            if factor == 0.0 {
                continue;
            }
            let (upper, lower) = mat.split_at_mut(row);
            for (t, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *t -= factor * p;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| mat[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / mat[row][row];
    }
    Ok(x)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dct_recovers_cosine_polynomial() {
        let f = |t: f64| 1.0 + 0.5 * t.cos() - 0.25 * (3.0 * t).cos();
        let s = CosineSeries::from_samples(&cosine_nodes(16).into_iter().map(f).collect::<Vec<_>>());
        assert!((s.coeffs()[0] - 1.0).abs() < 1e-14);
        assert!((s.coeffs()[1] - 0.5).abs() < 1e-14);
        assert!((s.coeffs()[3] + 0.25).abs() < 1e-14);
        assert!((s.eval(0.3) - f(0.3)).abs() < 1e-14);
    }

    #[test]
    fn adaptive_series_resolves_smooth_function() {
        let (s, n) = CosineSeries::adaptive(|t| 1.0 / (2.0 - t.cos()), 16, 4096, 1e-15).unwrap();
        assert!(n <= 128);
        for t in [0.0, 0.7, 2.0, PI] {
            assert!((s.eval(t) - 1.0 / (2.0 - t.cos())).abs() < 1e-13);
        }
        // ∫_0^π dθ/(2 - cos θ) = π/√3
        assert!((s.integral() - PI / 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn multiplication_by_one_plus_cos() {
        let g = CosineSeries::new(vec![0.3, -0.2, 0.1]);
        let h = g.mul_one_plus(-1.0);
        for t in [0.1, 1.0, 2.5] {
            assert!((h.eval(t) - (1.0 - t.cos()) * g.eval(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        assert!(w.iter().all(|w| *w > 0.0));
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        // ∫_0^1 log(t)/√t dt = -4
        let v = tanh_sinh(|l, _| l.ln() / l.sqrt(), 1.0, 1e-12).unwrap();
        assert!((v + 4.0).abs() < 1e-10);
    }

    #[test]
    fn dense_solve() {
        let x = solve_dense(vec![vec![0.0, 2.0], vec![3.0, 1.0]], vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!(solve_dense(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).is_err());
    }
}
