//! Recursion coefficients of a spectral measure.
//!
//! The absolutely continuous part is discretised with per-band quadrature
//! nodes and the orthonormal-polynomial recursion is run on the discrete
//! measure (Stieltjes procedure). Atoms are then added one at a time by an
//! orthogonal bulge chase on the Jacobi matrix: running the recursion
//! through an isolated node amplifies rounding exponentially. The node
//! count is doubled until the coefficients stop moving. Moment matrices are
//! never formed.

use std::sync::Arc;

use super::measure::SpectralMeasure;
use super::{JacobiParams, Tail};
use crate::error::{Error, Result};

/// Agreement required between two successive discretisations.
pub const STRIP_TOL: f64 = 1e-10;
const MAX_NODES_PER_BAND: usize = 1 << 16;

/// First `n` coefficients and the per-band node count that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Stripped {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub nodes_per_band: usize,
}

/// Stieltjes procedure on a discrete measure. Returns `(a_1..a_n, b_1..b_n)`.
pub fn discrete_recursion(xs: &[f64], ws: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let total: f64 = ws.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidMeasure("discrete measure has no mass".into()));
    }
    if n >= xs.len() {
        return Err(Error::Accuracy(format!("{n} coefficients requested from a {}-point discretisation", xs.len())));
    }
    let mut p_prev = vec![0.0; xs.len()];
    let mut p = vec![1.0 / total.sqrt(); xs.len()];
    let mut q = vec![0.0; xs.len()];
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut a_prev = 0.0;
    for _ in 0..n {
        let bn: f64 = xs.iter().zip(ws).zip(&p).map(|((x, w), p)| w * x * p * p).sum();
        for i in 0..xs.len() {
            q[i] = (xs[i] - bn) * p[i] - a_prev * p_prev[i];
        }
        // one local reorthogonalisation pass against the last two vectors
        for basis in [&p, &p_prev] {
            let proj: f64 = ws.iter().zip(&q).zip(basis.iter()).map(|((w, q), v)| w * q * v).sum();
            if proj != 0.0 {
                for (qi, vi) in q.iter_mut().zip(basis.iter()) {
                    *qi -= proj * vi;
                }
            }
        }
        let an = ws.iter().zip(&q).map(|(w, q)| w * q * q).sum::<f64>().sqrt();
        if !(an > 0.0) || !an.is_finite() {
            return Err(Error::Numerical(format!("recursion broke down at n = {}", a.len() + 1)));
        }
        a.push(an);
        b.push(bn);
        std::mem::swap(&mut p_prev, &mut p);
        for (pi, qi) in p.iter_mut().zip(&q) {
            *pi = qi / an;
        }
        a_prev = an;
    }
    Ok((a, b))
}

/// Jacobi matrix of `mass · μ_J + weight · δ_x`, where `μ_J` is the
/// spectral measure of `(b, a)` at the first basis vector; the matrix grows
/// by one row. Both measures are normalised.
pub fn add_point_mass(b: &mut Vec<f64>, a: &mut Vec<f64>, mass: f64, x: f64, weight: f64) {
    if b.is_empty() {
        b.push(x);
        return;
    }
    // the new node sits in front of the old matrix, uncoupled
    b.insert(0, x);
    a.insert(0, 0.0);
    let total = mass + weight;
    let mut c = (weight / total).sqrt();
    let mut s = (mass / total).sqrt();
    let mut p = 0;
    loop {
        // rotate the basis vectors p, p+1
        let (aa, bb, cc) = (b[p], a[p], b[p + 1]);
        b[p] = c * c * aa + 2.0 * c * s * bb + s * s * cc;
        b[p + 1] = s * s * aa - 2.0 * c * s * bb + c * c * cc;
        a[p] = c * s * (cc - aa) + (c * c - s * s) * bb;
        if p + 1 >= a.len() {
            break;
        }
        let bulge = s * a[p + 1];
        a[p + 1] *= c;
        if bulge == 0.0 {
            break;
        }
        let r = a[p].hypot(bulge);
        c = a[p] / r;
        s = bulge / r;
        a[p] = r;
        p += 1;
    }
    for v in a.iter_mut() {
        *v = v.abs();
    }
}

fn recursion_with_atoms(mu: &SpectralMeasure, nodes: usize, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let atoms = mu.point_masses();
    if atoms.is_empty() {
        let (xs, ws) = mu.discretize_bands(nodes);
        return discrete_recursion(&xs, &ws, n);
    }
    let (xs, ws) = mu.discretize_bands(nodes);
    let mut mass: f64 = ws.iter().sum();
    // one extra row so the last kept off-diagonal is exact
    let (mut a, mut b) = discrete_recursion(&xs, &ws, n + 1)?;
    a.pop();
    for p in atoms {
        add_point_mass(&mut b, &mut a, mass, p.position, p.weight);
        mass += p.weight;
    }
    a.truncate(n);
    b.truncate(n);
    Ok((a, b))
}

/// First `n` recursion coefficients of `mu`.
pub fn strip_raw(mu: &SpectralMeasure, n: usize) -> Result<Stripped> {
    if n == 0 {
        return Ok(Stripped { a: Vec::new(), b: Vec::new(), nodes_per_band: 0 });
    }
    let mut nodes = (2 * n + 32).next_power_of_two().max(64);
    let mut prev = recursion_with_atoms(mu, nodes, n)?;
    loop {
        nodes *= 2;
        if nodes > MAX_NODES_PER_BAND {
            return Err(Error::Accuracy(format!(
                "stripping {n} coefficients did not converge with {} nodes per band",
                nodes / 2
            )));
        }
        let cur = recursion_with_atoms(mu, nodes, n)?;
        let diff =
            cur.0.iter().zip(&prev.0).chain(cur.1.iter().zip(&prev.1)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if diff < STRIP_TOL {
            return Ok(Stripped { a: cur.0, b: cur.1, nodes_per_band: nodes });
        }
        prev = cur;
    }
}

/// Jacobi parameters of `mu`: the first `n` coefficients as head, the
/// measure itself as tail (restripped on demand, never extrapolated).
pub fn strip_coefficients(mu: &Arc<SpectralMeasure>, n: usize) -> Result<JacobiParams> {
    if n == 0 {
        return Err(Error::InvalidParams("at least one coefficient must be stripped".into()));
    }
    let s = strip_raw(mu, n)?;
    JacobiParams::new(s.a, s.b, Tail::Measure(Arc::clone(mu)))
}
