//! Finite gap sets and their logarithmic potential theory.
//!
//! A finite gap set is `e = [α_1, β_1] ∪ ⋯ ∪ [α_{ℓ+1}, β_{ℓ+1}]`. Its
//! equilibrium measure has density `|Q(x)| / (π √|R(x)|)` on `e`, where
//! `R(x) = ∏ (x-α_j)(x-β_j)` and `Q` is monic of degree `ℓ` with exactly one
//! zero in every gap, pinned by `∫_gap Q/√R = 0`.
//!
//! Branch of `√R`: real and positive on `(β_{ℓ+1}, ∞)` and continued through
//! `ℂ \ e`. It therefore changes sign across every band: on a gap or band with
//! `k` bands to its right the real value (resp. the `+i0` boundary value's
//! imaginary part) carries the sign `(-1)^k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, CosineSeries};

/// Default number of nodes per band or gap.
pub const DEFAULT_NODES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct FiniteGapSet {
    bands: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for FiniteGapSet {
    type Error = Error;

    fn try_from(bands: Vec<[f64; 2]>) -> Result<Self> {
        Self::from_bands(&bands)
    }
}

impl From<FiniteGapSet> for Vec<[f64; 2]> {
    fn from(e: FiniteGapSet) -> Self {
        e.bands
    }
}

impl FiniteGapSet {
    /// Builds a set from `2(ℓ+1)` endpoints `α_1, β_1, α_2, …`.
    pub fn new(endpoints: &[f64]) -> Result<Self> {
        if endpoints.is_empty() || !endpoints.len().is_multiple_of(2) {
            return Err(Error::InvalidBandSet(format!(
                "need a positive even number of endpoints, got {}",
                endpoints.len()
            )));
        }
        let bands: Vec<[f64; 2]> = endpoints.chunks(2).map(|c| [c[0], c[1]]).collect();
        Self::from_bands(&bands)
    }

    pub fn from_bands(bands: &[[f64; 2]]) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidBandSet("no bands".into()));
        }
        for (j, b) in bands.iter().enumerate() {
            if !b[0].is_finite() || !b[1].is_finite() {
                return Err(Error::InvalidBandSet(format!("band {} has a non-finite endpoint", j + 1)));
            }
            if b[0] >= b[1] {
                return Err(Error::InvalidBandSet(format!(
                    "band {} = [{}, {}] violates α_{} < β_{}",
                    j + 1,
                    b[0],
                    b[1],
                    j + 1,
                    j + 1
                )));
            }
        }
        for (j, w) in bands.windows(2).enumerate() {
            if w[0][1] >= w[1][0] {
                return Err(Error::InvalidBandSet(format!(
                    "bands {} and {} overlap or touch: β_{} = {} ≥ α_{} = {}",
                    j + 1,
                    j + 2,
                    j + 1,
                    w[0][1],
                    j + 2,
                    w[1][0]
                )));
            }
        }
        Ok(Self { bands: bands.to_vec() })
    }

    pub fn bands(&self) -> &[[f64; 2]] {
        &self.bands
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Number of gaps `ℓ`.
    pub fn gap_count(&self) -> usize {
        self.bands.len() - 1
    }

    /// Open gaps `(β_j, α_{j+1})`.
    pub fn gaps(&self) -> Vec<[f64; 2]> {
        self.bands.windows(2).map(|w| [w[0][1], w[1][0]]).collect()
    }

    /// Convex hull `[α_1, β_{ℓ+1}]`.
    pub fn hull(&self) -> [f64; 2] {
        [self.bands[0][0], self.bands[self.bands.len() - 1][1]]
    }

    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.bands.iter().flat_map(|b| b.iter().copied())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.bands.iter().any(|b| b[0] <= x && x <= b[1])
    }

    /// Index of the band whose interior contains `x`.
    pub fn band_of_interior(&self, x: f64) -> Option<usize> {
        self.bands.iter().position(|b| b[0] < x && x < b[1])
    }

    /// Index of the gap whose closure contains `x`.
    pub fn gap_of(&self, x: f64) -> Option<usize> {
        self.gaps().iter().position(|g| g[0] <= x && x <= g[1])
    }

    /// `e' = s·e + t` for `s > 0`.
    pub fn affine(&self, s: f64, t: f64) -> Result<Self> {
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::InvalidBandSet(format!("affine scale {s} must be positive")));
        }
        Self::from_bands(&self.bands.iter().map(|b| [s * b[0] + t, s * b[1] + t]).collect::<Vec<_>>())
    }

    /// `R(x) = ∏ (x-α_j)(x-β_j)`.
    pub fn r_poly(&self, x: f64) -> f64 {
        self.endpoints().map(|p| x - p).product()
    }

    /// Principal branch of `√R(z)`. For real `z` inside a band the `+i0`
    /// boundary value is returned.
    pub fn sqrt_r(&self, z: Complex64) -> Complex64 {
        if z.im == 0.0 {
            return self.sqrt_r_upper(z.re);
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for b in &self.bands {
            let m = 0.5 * (b[0] + b[1]);
            let r = 0.5 * (b[1] - b[0]);
            let w = (z - m) / r;
            acc *= (w - 1.0).sqrt() * (w + 1.0).sqrt() * r;
        }
        acc
    }

    /// Boundary value `√R(x + i0)` for real `x`.
    pub fn sqrt_r_upper(&self, x: f64) -> Complex64 {
        let right = self.bands.iter().filter(|b| b[0] > x).count();
        let sign = if right % 2 == 0 { 1.0 } else { -1.0 };
        let mag = self.r_poly(x).abs().sqrt();
        if self.band_of_interior(x).is_some() {
            Complex64::new(0.0, sign * mag)
        } else {
            Complex64::new(sign * mag, 0.0)
        }
    }

    /// Principal real value of `√R` on a gap or outside the hull.
    pub fn sqrt_r_real(&self, x: f64) -> Result<f64> {
        if self.band_of_interior(x).is_some() {
            return Err(Error::Domain(format!("√R is not real at band point {x}")));
        }
        Ok(self.sqrt_r_upper(x).re)
    }

    pub fn dist_to_set(&self, x: f64) -> f64 {
        self.bands
            .iter()
            .map(|b| {
                if x < b[0] {
                    b[0] - x
                } else if x > b[1] {
                    x - b[1]
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn dist_to_complement(&self, x: f64) -> f64 {
        match self.bands.iter().find(|b| b[0] <= x && x <= b[1]) {
            Some(b) => (x - b[0]).min(b[1] - x),
            None => 0.0,
        }
    }

    /// Geometry of band `j` under the cosine parametrisation.
    pub fn band_interval(&self, j: usize) -> Interval {
        Interval::new(self.bands[j][0], self.bands[j][1])
    }

    /// Geometry of gap `j` (between bands `j` and `j+1`).
    pub fn gap_interval(&self, j: usize) -> Interval {
        Interval::new(self.bands[j][1], self.bands[j + 1][0])
    }

    /// `|R(x)| / |(x-lo)(x-hi)|` at `x = iv.x(θ)`, where `iv` is one of this
    /// set's bands or gaps, evaluated without cancellation near the ends.
    pub fn reduced_r_abs(&self, iv: &Interval, theta: f64) -> f64 {
        self.endpoints().filter(|&p| p != iv.lo && p != iv.hi).map(|p| iv.offset(theta, p).abs()).product()
    }
}

/// A closed interval `[lo, hi]` with the substitution `x = m + r cos θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn x(&self, theta: f64) -> f64 {
        self.center() + self.radius() * theta.cos()
    }

    /// `x(θ) - p`, accurate when `p` is at or near an endpoint.
    pub fn offset(&self, theta: f64, p: f64) -> f64 {
        let r = self.radius();
        if p >= self.center() {
            let s = (0.5 * theta).sin();
            (self.hi - p) - 2.0 * r * s * s
        } else {
            let c = (0.5 * theta).cos();
            (self.lo - p) + 2.0 * r * c * c
        }
    }

    /// `θ` with `x(θ) = x`.
    pub fn theta_of(&self, x: f64) -> f64 {
        ((x - self.center()) / self.radius()).clamp(-1.0, 1.0).acos()
    }
}

/// Options for [`solve_equilibrium_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions {
    /// Initial node count per band/gap.
    pub nodes: usize,
    /// Relative change at which node doubling stops.
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self { nodes: DEFAULT_NODES, rel_tol: 1e-10, max_nodes: 1 << 13 }
    }
}

/// Solved equilibrium problem for a finite gap set.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumData {
    set: FiniteGapSet,
    gap_zeros: Vec<f64>,
    robin_constant: f64,
    capacity: f64,
    harmonic_measures: Vec<f64>,
    /// Per band: cosine series of `w(x(θ)) · r sin θ`, the equilibrium
    /// mass per unit `θ`.
    band_series: Vec<CosineSeries>,
    gap_nodes: usize,
    band_nodes: Vec<usize>,
    robin_spread: f64,
}

#[derive(Serialize)]
struct EquilibriumJson<'a> {
    bands: &'a FiniteGapSet,
    gap_zeros: &'a [f64],
    robin_constant: f64,
    capacity: f64,
    harmonic_measures: &'a [f64],
    node_counts: NodeCounts<'a>,
}

#[derive(Serialize)]
struct NodeCounts<'a> {
    gaps: usize,
    bands: &'a [usize],
}

impl Serialize for EquilibriumData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EquilibriumJson {
            bands: &self.set,
            gap_zeros: &self.gap_zeros,
            robin_constant: self.robin_constant,
            capacity: self.capacity,
            harmonic_measures: &self.harmonic_measures,
            node_counts: NodeCounts { gaps: self.gap_nodes, bands: &self.band_nodes },
        }
        .serialize(s)
    }
}

pub fn solve_equilibrium(e: &FiniteGapSet) -> Result<EquilibriumData> {
    solve_equilibrium_with(e, &EquilibriumOptions::default())
}

pub fn solve_equilibrium_with(e: &FiniteGapSet, opts: &EquilibriumOptions) -> Result<EquilibriumData> {
    let ell = e.gap_count();
    let [h0, h1] = e.hull();
    let center = 0.5 * (h0 + h1);
    let scale = 0.5 * (h1 - h0);

    // Q(x) = s^ℓ Q̃(u), u = (x - center)/scale; solve for the non-leading
    // coefficients of Q̃ from the gap conditions.
    let mut gap_nodes = 0;
    let mut q_coeffs: Vec<f64> = Vec::new();
    if ell > 0 {
        let mut n = opts.nodes.max(8);
        let mut prev: Option<Vec<f64>> = None;
        loop {
            let coeffs = gap_condition_solve(e, n, center, scale)?;
            if let Some(p) = &prev {
                let diff = coeffs.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let mag = coeffs.iter().map(|c| c.abs()).fold(1.0, f64::max);
                if diff <= opts.rel_tol * mag {
                    q_coeffs = coeffs;
                    gap_nodes = n;
                    break;
                }
            }
            if n >= opts.max_nodes {
                return Err(Error::Accuracy(format!("gap conditions unresolved at {n} nodes")));
            }
            prev = Some(coeffs);
            n *= 2;
        }
    }
    let q_tilde = |u: f64| -> f64 {
        let mut acc = 1.0;
        for c in q_coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    };
    let mut gap_zeros = Vec::with_capacity(ell);
    for g in e.gaps() {
        let lo = (g[0] - center) / scale;
        let hi = (g[1] - center) / scale;
        let root = quadrature::bisect(q_tilde, lo, hi).map_err(|err| {
            Error::Numerical(format!("gap polynomial has no zero in gap [{}, {}]: {err}", g[0], g[1]))
        })?;
        gap_zeros.push(center + scale * root);
    }

    let mut band_series = Vec::with_capacity(ell + 1);
    let mut band_nodes = Vec::with_capacity(ell + 1);
    for j in 0..=ell {
        let iv = e.band_interval(j);
        let zeros = &gap_zeros;
        let g = |theta: f64| {
            let q: f64 = zeros.iter().map(|&z| iv.offset(theta, z)).product();
            q.abs() / (PI * e.reduced_r_abs(&iv, theta).sqrt())
        };
        let (series, n) = CosineSeries::adaptive(g, opts.nodes, opts.max_nodes, 1e-15)?;
        band_series.push(series);
        band_nodes.push(n);
    }
    let harmonic_measures: Vec<f64> = band_series.iter().map(|s| s.integral()).collect();

    let mut eq = EquilibriumData {
        set: e.clone(),
        gap_zeros,
        robin_constant: 0.0,
        capacity: 1.0,
        harmonic_measures,
        band_series,
        gap_nodes,
        band_nodes,
        robin_spread: 0.0,
    };
    let mids: Vec<f64> = e.bands().iter().map(|b| eq.potential(Complex64::new(0.5 * (b[0] + b[1]), 0.0))).collect();
    let robin = mids.iter().sum::<f64>() / mids.len() as f64;
    let spread =
        mids.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - mids.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if spread > 1e-8 {
        return Err(Error::Invariant(format!("equilibrium potential differs across bands by {spread:e}")));
    }
    eq.robin_constant = robin;
    eq.capacity = (-robin).exp();
    eq.robin_spread = spread;
    Ok(eq)
}

fn gap_condition_solve(e: &FiniteGapSet, n: usize, center: f64, scale: f64) -> Result<Vec<f64>> {
    let ell = e.gap_count();
    let nodes = quadrature::cosine_nodes(n);
    let w = PI / n as f64;
    let mut mat = vec![vec![0.0; ell]; ell];
    let mut rhs = vec![0.0; ell];
    for (j, row) in mat.iter_mut().enumerate() {
        let iv = e.gap_interval(j);
        let mut moments = vec![0.0; ell + 1];
        for &theta in &nodes {
            let u = (iv.x(theta) - center) / scale;
            let weight = w / e.reduced_r_abs(&iv, theta).sqrt();
            let mut p = weight;
            for m in moments.iter_mut() {
                *m += p;
                p *= u;
            }
        }
        row.copy_from_slice(&moments[..ell]);
        rhs[j] = -moments[ell];
    }
    quadrature::solve_dense(mat, rhs)
}

impl EquilibriumData {
    pub fn set(&self) -> &FiniteGapSet {
        &self.set
    }

    pub fn gap_zeros(&self) -> &[f64] {
        &self.gap_zeros
    }

    pub fn robin_constant(&self) -> f64 {
        self.robin_constant
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn harmonic_measures(&self) -> &[f64] {
        &self.harmonic_measures
    }

    /// Spread of the potential across band midpoints (Robin self-check).
    pub fn robin_spread(&self) -> f64 {
        self.robin_spread
    }

    pub fn band_series(&self) -> &[CosineSeries] {
        &self.band_series
    }

    pub fn node_counts(&self) -> (usize, &[usize]) {
        (self.gap_nodes, &self.band_nodes)
    }

    /// `Q(x) = ∏ (x - ζ_j)`.
    pub fn q_poly(&self, x: f64) -> f64 {
        self.gap_zeros.iter().map(|z| x - z).product()
    }

    /// Equilibrium density at a band-interior point.
    pub fn density(&self, x: f64) -> Result<f64> {
        let j = self.set.band_of_interior(x).ok_or_else(|| Error::Domain(format!("{x} is not in a band interior")))?;
        let iv = self.set.band_interval(j);
        let theta = iv.theta_of(x);
        let rsin = (iv.offset(theta, iv.lo) * iv.offset(theta, iv.hi)).abs().sqrt();
        Ok(self.band_series[j].eval(theta) / rsin)
    }

    /// `Φ(z) = ∫ log|z-x|^{-1} dρ_e(x)`.
    ///
    /// Evaluated in closed form from the band cosine series using
    /// `log|W - cos θ| = log(|ζ|/2) - Σ_k (2/k) Re(ζ^{-k}) cos kθ`,
    /// `ζ = W + √(W²-1)`, `|ζ| ≥ 1`, which is valid on the band itself.
    pub fn potential(&self, z: Complex64) -> f64 {
        let mut phi = 0.0;
        for (j, series) in self.band_series.iter().enumerate() {
            let iv = self.set.band_interval(j);
            let r = iv.radius();
            let w = (z - iv.center()) / r;
            let mut zeta = w + (w - 1.0).sqrt() * (w + 1.0).sqrt();
            if zeta.norm() < 1.0 {
                zeta = w - (w - 1.0).sqrt() * (w + 1.0).sqrt();
            }
            let inv = zeta.inv();
            let c = series.coeffs();
            let mut pow = inv;
            let mut acc = 0.0;
            for (k, ck) in c.iter().enumerate().skip(1) {
                acc += ck * pow.re / k as f64;
                pow *= inv;
            }
            let log_term = c[0] * (zeta.norm() / 2.0).ln() - acc;
            phi -= PI * c[0] * r.ln() + PI * log_term;
        }
        phi
    }

    /// `G(z) = E - Φ(z)`, the Green's function with pole at infinity.
    pub fn green(&self, z: Complex64) -> f64 {
        (self.robin_constant - self.potential(z)).max(0.0)
    }
}

pub fn capacity(eq: &EquilibriumData) -> f64 {
    eq.capacity()
}

pub fn harmonic_measures(eq: &EquilibriumData) -> Vec<f64> {
    eq.harmonic_measures().to_vec()
}

/// `x(z) = z + 1/z`.
pub fn joukowski(z: Complex64) -> Complex64 {
    z + z.inv()
}

/// Inverse of [`joukowski`] on the branch with `|z| ≤ 1`.
pub fn joukowski_inverse(x: Complex64) -> Complex64 {
    let root = (x - 2.0).sqrt() * (x + 2.0).sqrt();
    let a = 0.5 * (x - root);
    let b = 0.5 * (x + root);
    if a.norm() <= b.norm() {
        a
    } else {
        b
    }
}

/// Smallest `p ≤ max_denominator` with every `ω_j` within `tol` of some `k_j/p`.
pub fn rational_harmonic_period(omega: &[f64], tol: f64, max_denominator: usize) -> Option<usize> {
    (1..=max_denominator).find(|&p| {
        let pf = p as f64;
        omega.iter().all(|w| (w - (w * pf).round() / pf).abs() < tol)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn construction_and_validation() {
        let e = FiniteGapSet::new(&[-2.0, 2.0]).unwrap();
        assert_eq!(e.gap_count(), 0);
        let e = FiniteGapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        assert_eq!(e.gap_count(), 1);
        assert_eq!(e.bands(), &[[-2.0, -1.0], [1.0, 2.0]]);
        let err = FiniteGapSet::new(&[-2.0, -1.0, -1.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("touch"), "{err}");
        assert!(FiniteGapSet::new(&[1.0, 1.0]).is_err());
        assert!(FiniteGapSet::new(&[0.0, f64::NAN]).is_err());
        assert!(FiniteGapSet::new(&[0.0, 1.0, 2.0]).is_err());
        assert!(FiniteGapSet::new(&[]).is_err());
        assert!(FiniteGapSet::new(&[0.0, 2.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn json_is_array_of_pairs() {
        let e = FiniteGapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, "[[-2.0,-1.0],[1.0,2.0]]");
        let back: FiniteGapSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<FiniteGapSet>("[[0.0,1.0],[0.5,2.0]]").is_err());
    }

    #[test]
    fn distances() {
        let e = FiniteGapSet::new(&[-2.0, 2.0]).unwrap();
        assert_eq!(e.dist_to_set(3.0), 1.0);
        assert_eq!(e.dist_to_complement(0.0), 2.0);
        let e2 = FiniteGapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        assert_eq!(e2.dist_to_set(0.0), 1.0);
        assert_eq!(e2.dist_to_complement(0.0), 0.0);
        assert_eq!(e2.dist_to_complement(1.25), 0.25);
    }

    #[test]
    fn sqrt_r_branch() {
        let e = FiniteGapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        // positive right of the hull, negative in the single gap
        assert!(e.sqrt_r_real(3.0).unwrap() > 0.0);
        assert!(e.sqrt_r_real(0.0).unwrap() < 0.0);
        assert!(e.sqrt_r_real(-3.0).unwrap() > 0.0);
        // continuity of the complex branch with the boundary values
        for x in [-1.5, 0.0, 1.5, 3.0, -3.0] {
            let above = e.sqrt_r(Complex64::new(x, 1e-9));
            assert!((above - e.sqrt_r_upper(x)).norm() < 1e-6, "x = {x}");
        }
        assert!(e.sqrt_r_upper(1.5).im > 0.0);
        assert!(e.sqrt_r_upper(-1.5).im < 0.0);
        // squares to R
        let z = Complex64::new(0.3, 0.7);
        let s = e.sqrt_r(z);
        let r: Complex64 = e.endpoints().map(|p| z - p).product();
        assert!((s * s - r).norm() < 1e-12);
    }

    #[test]
    fn single_band_equilibrium() {
        let e = FiniteGapSet::new(&[-2.0, 2.0]).unwrap();
        let eq = solve_equilibrium(&e).unwrap();
        assert!(eq.gap_zeros().is_empty());
        assert!((eq.capacity() - 1.0).abs() < 1e-12);
        assert!((eq.density(0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!(eq.density(2.5).is_err());
        let g3 = eq.green(c(3.0));
        assert!((g3 - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-10);
        assert!((eq.potential(c(1e6)) + 1e6f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn symmetric_two_band() {
        let e = FiniteGapSet::new(&[-2.0, -1.0, 1.0, 2.0]).unwrap();
        let eq = solve_equilibrium(&e).unwrap();
        assert!(eq.gap_zeros()[0].abs() < 1e-12);
        assert!((eq.capacity() - 3f64.sqrt() / 2.0).abs() < 1e-10);
        for w in eq.harmonic_measures() {
            assert!((w - 0.5).abs() < 1e-12);
        }
        assert!((eq.density(1.3).unwrap() - eq.density(-1.3).unwrap()).abs() < 1e-12);
        assert!(eq.potential(c(0.0)) < eq.robin_constant());
        assert!(eq.green(c(0.0)) > 0.0);
    }

    #[test]
    fn joukowski_maps() {
        assert!((joukowski(c(0.5)) - c(2.5)).norm() < 1e-15);
        assert!((joukowski_inverse(c(2.0)) - c(1.0)).norm() < 1e-8);
        assert!((joukowski_inverse(c(2.5)) - c(0.5)).norm() < 1e-15);
        let z = Complex64::new(0.3, -0.4);
        assert!((joukowski_inverse(joukowski(z)) - z).norm() < 1e-14);
    }

    #[test]
    fn rational_period() {
        assert_eq!(rational_harmonic_period(&[0.5, 0.5], 1e-9, 10), Some(2));
        assert_eq!(rational_harmonic_period(&[1.0], 1e-9, 10), Some(1));
        let g = (5f64.sqrt() - 1.0) / 2.0;
        assert_eq!(rational_harmonic_period(&[1.0 - g, g], 1e-6, 50), None);
        assert_eq!(rational_harmonic_period(&[1.0 / 3.0, 2.0 / 3.0], 1e-9, 10), Some(3));
    }
}
