//! Points of the isospectral torus of a finite gap set.
//!
//! A torus point is labelled by Dirichlet data (one pole per gap plus a
//! sheet). Its m-function is the minimal Herglotz function
//! `m = c (√R - S) / ∏ (z - γ_j)` with `S` a real polynomial of degree
//! `ℓ + 1`; everything is computed in the variable `u = (x - x₀)/H` that maps
//! the convex hull onto `[-1, 1]`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandset::{FiniteGapSet, Interval};
use crate::error::{Error, Result};
use crate::jacobi::{
    strip_coefficients, strip_raw, BandDensity, HerglotzValue, JacobiParams, PointMass, SpectralMeasure,
};
use crate::quadrature;

/// Which sheet of the two-sheeted surface carries the pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sheet {
    /// `+1`: the pole is on the principal sheet and carries a point mass.
    Principal,
    /// `-1`: no point mass.
    Second,
}

impl TryFrom<i8> for Sheet {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Sheet::Principal),
            -1 => Ok(Sheet::Second),
            _ => Err(Error::InvalidDirichlet(format!("sheet must be +1 or -1, got {v}"))),
        }
    }
}

impl From<Sheet> for i8 {
    fn from(s: Sheet) -> i8 {
        match s {
            Sheet::Principal => 1,
            Sheet::Second => -1,
        }
    }
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Principal => 1.0,
            Sheet::Second => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletPoint {
    pub gamma: f64,
    pub sheet: Sheet,
}

/// Relative distance below which a pole counts as sitting on a gap edge.
const EDGE_SNAP: f64 = 1e-12;

/// Where a pole sits inside its closed gap.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Placement {
    Lower,
    Upper,
    Interior,
}

/// One pole per gap. Serialises as a JSON list of `{gamma, sheet}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirichletData {
    points: Vec<DirichletPoint>,
}

impl DirichletData {
    pub fn new(e: &FiniteGapSet, points: Vec<DirichletPoint>) -> Result<Self> {
        let dd = Self { points };
        dd.validate(e)?;
        Ok(dd)
    }

    /// Data for a set without gaps.
    pub fn empty() -> Self {
        Self { points: Vec::new() }
    }

    pub fn points(&self) -> &[DirichletPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self, e: &FiniteGapSet) -> Result<()> {
        if self.points.len() != e.gap_count() {
            return Err(Error::InvalidDirichlet(format!(
                "{} poles given for {} gaps",
                self.points.len(),
                e.gap_count()
            )));
        }
        for (j, (p, g)) in self.points.iter().zip(e.gaps()).enumerate() {
            if !(p.gamma >= g[0] && p.gamma <= g[1]) {
                return Err(Error::InvalidDirichlet(format!(
                    "pole {} at {} lies outside its gap [{}, {}]",
                    j + 1,
                    p.gamma,
                    g[0],
                    g[1]
                )));
            }
        }
        Ok(())
    }

    /// Data from one circle angle per gap: `γ = mid - half·cos φ`, principal
    /// sheet for `sin φ > 0`. `φ = 0, π` are the gap edges.
    pub fn from_angles(e: &FiniteGapSet, angles: &[f64]) -> Result<Self> {
        if angles.len() != e.gap_count() {
            return Err(Error::InvalidDirichlet(format!("{} angles for {} gaps", angles.len(), e.gap_count())));
        }
        let points = e
            .gaps()
            .iter()
            .zip(angles)
            .map(|(g, &phi)| {
                let phi = phi.rem_euclid(2.0 * PI);
                let (s, c) = phi.sin_cos();
                let mid = 0.5 * (g[0] + g[1]);
                let half = 0.5 * (g[1] - g[0]);
                let gamma = if s.abs() < 1e-15 {
                    if c > 0.0 {
                        g[0]
                    } else {
                        g[1]
                    }
                } else {
                    (mid - half * c).clamp(g[0], g[1])
                };
                let sheet = if s > 0.0 { Sheet::Principal } else { Sheet::Second };
                DirichletPoint { gamma, sheet }
            })
            .collect();
        Self::new(e, points)
    }

    /// Inverse of [`DirichletData::from_angles`].
    pub fn angles(&self, e: &FiniteGapSet) -> Vec<f64> {
        self.points
            .iter()
            .zip(e.gaps())
            .map(|(p, g)| {
                let half = 0.5 * (g[1] - g[0]);
                let t = ((0.5 * (g[0] + g[1]) - p.gamma) / half).clamp(-1.0, 1.0).acos();
                match p.sheet {
                    Sheet::Principal => t,
                    Sheet::Second => (2.0 * PI - t).rem_euclid(2.0 * PI),
                }
            })
            .collect()
    }

    fn placements(&self, e: &FiniteGapSet) -> Vec<Placement> {
        self.points
            .iter()
            .zip(e.gaps())
            .map(|(p, g)| {
                let tol = EDGE_SNAP * (g[1] - g[0]);
                if p.gamma - g[0] <= tol {
                    Placement::Lower
                } else if g[1] - p.gamma <= tol {
                    Placement::Upper
                } else {
                    Placement::Interior
                }
            })
            .collect()
    }
}

/// `m(z) = c (√R(z) - S(z)) / ∏ (z - γ_j)` in hull-scaled variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalHerglotz {
    set: FiniteGapSet,
    dirichlet: DirichletData,
    scaled: FiniteGapSet,
    center: f64,
    half_width: f64,
    /// Scaled pole positions (gap edges exact).
    poles: Vec<f64>,
    placements: Vec<Placement>,
    /// Coefficients of `S(u)`, lowest degree first.
    s: Vec<f64>,
    c: f64,
    pole_weights: Vec<f64>,
}

impl MinimalHerglotz {
    pub fn set(&self) -> &FiniteGapSet {
        &self.set
    }

    pub fn dirichlet(&self) -> &DirichletData {
        &self.dirichlet
    }

    /// Coefficients of `S` in the scaled variable, lowest degree first.
    pub fn s_coeffs(&self) -> &[f64] {
        &self.s
    }

    /// The scale `c` in the scaled variable.
    pub fn scale(&self) -> f64 {
        self.c
    }

    pub fn pole_weights(&self) -> &[f64] {
        &self.pole_weights
    }

    /// `(x₀, H)` with `u = (x - x₀)/H`.
    pub fn hull_map(&self) -> (f64, f64) {
        (self.center, self.half_width)
    }

    fn to_u(&self, z: Complex64) -> Complex64 {
        (z - self.center) / self.half_width
    }

    fn s_eval(&self, u: Complex64) -> Complex64 {
        self.s.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
    }

    fn pole_product(&self, u: Complex64) -> Complex64 {
        self.poles.iter().map(|&g| u - g).product()
    }

    fn branch(&self, z: Complex64, sign: f64) -> HerglotzValue {
        let u = self.to_u(z);
        let den = self.pole_product(u);
        let num = self.c * (sign * self.scaled.sqrt_r(u) - self.s_eval(u));
        if den.norm() == 0.0 {
            return if num.norm() < 1e-12 {
                HerglotzValue::Finite(Complex64::new(f64::NAN, 0.0))
            } else {
                HerglotzValue::Pole
            };
        }
        HerglotzValue::Finite(num / den / self.half_width)
    }

    /// Value on the principal sheet (`+i0` boundary value on bands).
    pub fn eval(&self, z: Complex64) -> HerglotzValue {
        self.branch(z, 1.0)
    }

    /// Value on the second sheet, `c (-√R - S) / ∏ (z - γ_j)`.
    pub fn eval_second_sheet(&self, z: Complex64) -> HerglotzValue {
        self.branch(z, -1.0)
    }

    /// Diagonal Green's function of the reflectionless two-sided extension,
    /// `-(a_0² (m - m̂))^{-1}` with `a_0² = H²/(2c)`.
    pub fn green_00(&self, z: Complex64) -> HerglotzValue {
        match (self.eval(z), self.eval_second_sheet(z)) {
            (HerglotzValue::Finite(m), HerglotzValue::Finite(mh)) => {
                let a0sq = self.half_width * self.half_width / (2.0 * self.c);
                let d = a0sq * (m - mh);
                if d.norm() == 0.0 {
                    HerglotzValue::Pole
                } else {
                    HerglotzValue::Finite(-d.inv())
                }
            }
            _ => HerglotzValue::Finite(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn point_masses(&self) -> Vec<PointMass> {
        self.poles
            .iter()
            .zip(&self.pole_weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(&g, &w)| PointMass { position: self.center + self.half_width * g, weight: w })
            .collect()
    }
}

/// Solves for the minimal Herglotz function with the given Dirichlet data.
pub fn minimal_herglotz(e: &FiniteGapSet, dd: &DirichletData) -> Result<MinimalHerglotz> {
    dd.validate(e)?;
    let [lo, hi] = e.hull();
    let center = 0.5 * (lo + hi);
    let half_width = 0.5 * (hi - lo);
    let scaled = e.affine(1.0 / half_width, -center / half_width)?;
    let gaps = scaled.gaps();
    let placements = dd.placements(e);
    let poles: Vec<f64> = dd
        .points
        .iter()
        .zip(&placements)
        .zip(&gaps)
        .map(|((p, pl), g)| match pl {
            Placement::Lower => g[0],
            Placement::Upper => g[1],
            Placement::Interior => ((p.gamma - center) / half_width).clamp(g[0], g[1]),
        })
        .collect();
    let ell = e.gap_count();
    let ends: Vec<f64> = scaled.endpoints().collect();
    let p1: f64 = ends.iter().sum();
    let p2: f64 = ends.iter().map(|x| x * x).sum();
    let s1 = -0.5 * p1;
    let s2 = p1 * p1 / 8.0 - p2 / 4.0;

    let mut s = vec![0.0; ell + 2];
    s[ell + 1] = 1.0;
    s[ell] = s1;
    if ell > 0 {
        let mut mat = Vec::with_capacity(ell);
        let mut rhs = Vec::with_capacity(ell);
        for (j, &g) in poles.iter().enumerate() {
            let root = match placements[j] {
                Placement::Interior => scaled.sqrt_r_real(g)?,
                _ => 0.0,
            };
            mat.push((0..ell).map(|k| g.powi(k as i32)).collect::<Vec<_>>());
            rhs.push(-dd.points[j].sheet.sign() * root - g.powi(ell as i32 + 1) - s1 * g.powi(ell as i32));
        }
        let d = quadrature::solve_dense(mat, rhs)
            .map_err(|err| Error::Numerical(format!("degenerate Dirichlet data: {err}")))?;
        s[..ell].copy_from_slice(&d);
    }
    let lead = if ell == 0 { s2 } else { s2 - s[ell - 1] };
    let c = -1.0 / lead;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Invariant(format!("minimal Herglotz scale c = {c} is not positive")));
    }

    let mut pole_weights = vec![0.0; ell];
    for j in 0..ell {
        if placements[j] != Placement::Interior || dd.points[j].sheet == Sheet::Second {
            continue;
        }
        let g = poles[j];
        let others: f64 = poles.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, &p)| g - p).product();
        let w = -2.0 * c * scaled.sqrt_r_real(g)? / others;
        if !(w > 0.0) {
            return Err(Error::Invariant(format!("pole weight {w} at gap {} is not positive", j + 1)));
        }
        pole_weights[j] = w;
    }

    Ok(MinimalHerglotz {
        set: e.clone(),
        dirichlet: dd.clone(),
        scaled,
        center,
        half_width,
        poles,
        placements,
        s,
        c,
        pole_weights,
    })
}

/// Spectral measure whose Stieltjes transform is `mh`.
pub fn torus_measure(mh: &MinimalHerglotz) -> Result<SpectralMeasure> {
    let scaled = &mh.scaled;
    let mut bands = Vec::with_capacity(scaled.band_count());
    for j in 0..scaled.band_count() {
        let iv: Interval = scaled.band_interval(j);
        let r = iv.radius();
        // a pole on the band's left end sits on the upper edge of gap j-1,
        // one on its right end on the lower edge of gap j
        let left_hit = j > 0 && mh.placements[j - 1] == Placement::Upper;
        let right_hit = j < mh.poles.len() && mh.placements[j] == Placement::Lower;
        let free_poles: Vec<f64> = mh
            .poles
            .iter()
            .enumerate()
            .filter(|(i, _)| !((*i + 1 == j && left_hit) || (*i == j && right_hit)))
            .map(|(_, &g)| g)
            .collect();
        let power = 2 - left_hit as i32 - right_hit as i32;
        let prefactor = mh.c * r.powi(power) / PI;
        // sign check at the band centre
        let mid = Complex64::new(iv.center(), 0.0);
        let sign = mh.c * scaled.sqrt_r_upper(iv.center()).im / mh.pole_product(mid).re;
        if !(sign > 0.0) {
            return Err(Error::Invariant(format!("torus band density is negative on band {}", j + 1)));
        }
        let g = |theta: f64| {
            let den: f64 = free_poles.iter().map(|&p| iv.offset(theta, p).abs()).product();
            prefactor * scaled.reduced_r_abs(&iv, theta).sqrt() / den
        };
        bands.push(BandDensity::from_smooth_fn(g, !left_hit, !right_hit)?);
    }
    SpectralMeasure::new(mh.set.clone(), bands, mh.point_masses())
}

/// A torus point with its measure and recursion coefficients.
#[derive(Debug, Clone)]
pub struct TorusPoint {
    pub dirichlet: DirichletData,
    pub measure: Arc<SpectralMeasure>,
    pub params: JacobiParams,
}

/// Torus point with the first `n` coefficients stripped; further
/// coefficients are obtained by restripping.
pub fn torus_jacobi(e: &FiniteGapSet, dd: &DirichletData, n: usize) -> Result<TorusPoint> {
    let mh = minimal_herglotz(e, dd)?;
    let measure = Arc::new(torus_measure(&mh)?);
    let params = strip_coefficients(&measure, n)?;
    Ok(TorusPoint { dirichlet: dd.clone(), measure, params })
}

/// Minimum clearance between residual grid points and band ends or poles.
pub const RESIDUAL_CLEARANCE: f64 = 1e-6;

/// `max |Re G_00|` over `points_per_band` equispaced interior points of
/// every band, with `m` taken as the boundary value of the Stieltjes
/// transform of the spectral measure and `m̂` from the second sheet.
pub fn reflectionless_residual(mh: &MinimalHerglotz, points_per_band: usize) -> Result<f64> {
    let mu = torus_measure(mh)?;
    let poles: Vec<f64> = mh.point_masses().iter().map(|p| p.position).collect();
    let a0sq = mh.half_width * mh.half_width / (2.0 * mh.c);
    let mut worst = 0.0f64;
    for b in mh.set.bands() {
        for i in 1..=points_per_band {
            let x = b[0] + (b[1] - b[0]) * i as f64 / (points_per_band + 1) as f64;
            let near_end = (x - b[0]).min(b[1] - x) < RESIDUAL_CLEARANCE;
            let near_pole = mh.dirichlet.points.iter().any(|p| (p.gamma - x).abs() < RESIDUAL_CLEARANCE)
                || poles.iter().any(|p| (p - x).abs() < RESIDUAL_CLEARANCE);
            if near_end || near_pole {
                continue;
            }
            let HerglotzValue::Finite(mh_x) = mh.eval_second_sheet(Complex64::new(x, 0.0)) else { continue };
            let d = a0sq * (mu.boundary_value(x)? - mh_x);
            if d.norm() > 0.0 {
                worst = worst.max((-d.inv()).re.abs());
            }
        }
    }
    Ok(worst)
}

/// Truncation target for the tail of the `d_m` series.
pub const DM_TAIL_TOL: f64 = 1e-12;

/// A `d_m` value together with the number of terms used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmValue {
    pub value: f64,
    pub k_max: usize,
}

/// Smallest `k` with `bound · e^{-k} / (1 - e^{-1}) < DM_TAIL_TOL`.
pub fn dm_cutoff(bound: f64) -> usize {
    let need = (bound.max(1e-300) / ((1.0 - (-1.0f64).exp()) * DM_TAIL_TOL)).ln();
    need.max(0.0).floor() as usize + 1
}

/// `Σ_{k=0}^{k_max} e^{-k} (|Δa_{m+k}| + |Δb_{m+k}|)` on materialised
/// sequences (index 0 holds coefficient 1).
pub fn d_m_slices(a1: &[f64], b1: &[f64], a2: &[f64], b2: &[f64], m: usize, k_max: usize) -> f64 {
    (0..=k_max)
        .map(|k| {
            let i = m + k - 1;
            (-(k as f64)).exp() * ((a1[i] - a2[i]).abs() + (b1[i] - b2[i]).abs())
        })
        .sum()
}

fn sup_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.abs() + y.abs()).fold(0.0, f64::max)
}

/// The exponentially weighted tail distance `d_m(J, J')`, `m ≥ 1`.
pub fn d_m(j1: &JacobiParams, j2: &JacobiParams, m: usize) -> Result<DmValue> {
    if m == 0 {
        return Err(Error::InvalidParams("d_m is indexed from m = 1".into()));
    }
    let mut window = 40;
    loop {
        let (a1, b1) = j1.coefficients(m + window)?;
        let (a2, b2) = j2.coefficients(m + window)?;
        let bound = sup_norm(&a1[m - 1..], &b1[m - 1..]) + sup_norm(&a2[m - 1..], &b2[m - 1..]);
        let k_max = dm_cutoff(bound);
        if k_max < window {
            return Ok(DmValue { value: d_m_slices(&a1, &b1, &a2, &b2, m, k_max), k_max });
        }
        window = 2 * k_max;
    }
}

/// Settings of the torus search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistanceOptions {
    /// Grid positions per sheet and gap.
    pub positions: usize,
    /// Local refinement stops once moves are below this size in `γ`.
    pub refine_tol: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self { positions: 16, refine_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    pub argmin: DirichletData,
    pub k_max: usize,
    pub grid: DistanceOptions,
    pub grid_best: f64,
    pub evaluations: usize,
}

/// Outcome of a grid-plus-refinement search over the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSearch {
    pub value: f64,
    pub argmin: DirichletData,
    pub grid_best: f64,
    pub evaluations: usize,
}

/// Minimises `objective(a, b)` over torus points, where `a`, `b` hold the
/// first `n_coeffs` coefficients. Candidates that fail to construct score
/// `+∞`.
pub fn search_torus<F>(e: &FiniteGapSet, n_coeffs: usize, opts: &DistanceOptions, objective: F) -> Result<TorusSearch>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    if opts.positions == 0 || !(opts.refine_tol > 0.0) {
        return Err(Error::InvalidParams("torus grid needs positive resolution and tolerance".into()));
    }
    let eval = |angles: &[f64]| -> f64 {
        let run = || -> Result<f64> {
            let dd = DirichletData::from_angles(e, angles)?;
            let mu = torus_measure(&minimal_herglotz(e, &dd)?)?;
            let s = strip_raw(&mu, n_coeffs)?;
            Ok(objective(&s.a, &s.b))
        };
        run().ok().filter(|v| !v.is_nan()).unwrap_or(f64::INFINITY)
    };
    let ell = e.gap_count();
    if ell == 0 {
        let value = eval(&[]);
        if !value.is_finite() {
            return Err(Error::Numerical("the single-band torus point could not be stripped".into()));
        }
        return Ok(TorusSearch { value, argmin: DirichletData::empty(), grid_best: value, evaluations: 1 });
    }

    let per_gap = 2 * opts.positions;
    let step0 = 2.0 * PI / per_gap as f64;
    let total = per_gap
        .checked_pow(ell as u32)
        .filter(|t| *t <= 1 << 22)
        .ok_or_else(|| Error::InvalidParams("torus grid too large".into()))?;
    let grid_point = |mut idx: usize| -> Vec<f64> {
        (0..ell)
            .map(|_| {
                let k = idx % per_gap;
                idx /= per_gap;
                step0 * k as f64
            })
            .collect()
    };
    let (best_idx, grid_best) = (0..total)
        .into_par_iter()
        .map(|i| (i, eval(&grid_point(i))))
        .reduce(|| (usize::MAX, f64::INFINITY), |x, y| if y.1 < x.1 || (y.1 == x.1 && y.0 < x.0) { y } else { x });
    if !grid_best.is_finite() {
        return Err(Error::Numerical("no torus grid point could be evaluated".into()));
    }
    let mut evaluations = total;

    let max_half = e.gaps().iter().map(|g| 0.5 * (g[1] - g[0])).fold(0.0, f64::max);
    let mut angles = grid_point(best_idx);
    let mut best = grid_best;
    let mut step = 0.5 * step0;
    while max_half * step >= opts.refine_tol {
        let mut improved = false;
        for g in 0..ell {
            for dir in [1.0, -1.0] {
                let mut trial = angles.clone();
                trial[g] = (trial[g] + dir * step).rem_euclid(2.0 * PI);
                let v = eval(&trial);
                evaluations += 1;
                if v < best {
                    best = v;
                    angles = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(TorusSearch { value: best, argmin: DirichletData::from_angles(e, &angles)?, grid_best, evaluations })
}

/// Upper bound for `inf_{J' on the torus} d_m(J, J')`: coarse grid over the
/// torus followed by a pattern search in the circle angles.
pub fn dist_to_torus(j: &JacobiParams, e: &FiniteGapSet, m: usize, opts: &DistanceOptions) -> Result<DistanceResult> {
    if m == 0 {
        return Err(Error::InvalidParams("d_m is indexed from m = 1".into()));
    }
    let [lo, hi] = e.hull();
    // every torus point has its spectrum inside the hull
    let torus_bound = lo.abs().max(hi.abs()) + 0.5 * (hi - lo);
    let mut window = 40;
    let (a, b, k_max) = loop {
        let (a, b) = j.coefficients(m + window)?;
        let k_max = dm_cutoff(sup_norm(&a[m - 1..], &b[m - 1..]) + torus_bound);
        if k_max < window {
            break (a, b, k_max);
        }
        window = 2 * k_max;
    };
    let found = search_torus(e, m + k_max, opts, |ta, tb| d_m_slices(&a, &b, ta, tb, m, k_max))?;
    Ok(DistanceResult {
        value: found.value,
        argmin: found.argmin,
        k_max,
        grid: *opts,
        grid_best: found.grid_best,
        evaluations: found.evaluations,
    })
}
