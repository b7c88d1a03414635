//! Spectral measures supported on a finite gap set plus finitely many atoms.
//!
//! On band `j`, parametrised as `x = m + r cos θ`, the absolutely continuous
//! part is stored as its mass per unit `θ`:
//!
//! ```text
//! f(x) dx = h(θ) dθ,   h(θ) = (1 + cos θ)^L (1 - cos θ)^R g(θ)
//! ```
//!
//! with `g` a smooth positive cosine series and `L`/`R` flags for square-root
//! vanishing of `f` at the left/right band edge. `L = R = 0` is the inverse
//! square-root edge behaviour of equilibrium-type densities; `L = R = 1` is
//! semicircle-type vanishing.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bandset::{EquilibriumData, FiniteGapSet, Interval};
use crate::error::{Error, Result};
use crate::quadrature::{self, CosineSeries};

/// Point mass `weight · δ_position` off the band set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub position: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandDensity {
    smooth: CosineSeries,
    vanish_left: bool,
    vanish_right: bool,
    /// Subintervals (in `x`) on which the density is identically zero.
    dead: Vec<[f64; 2]>,
    mass_series: CosineSeries,
}

impl BandDensity {
    pub fn new(smooth: CosineSeries, vanish_left: bool, vanish_right: bool) -> Self {
        let mut mass_series = smooth.clone();
        if vanish_left {
            mass_series = mass_series.mul_one_plus(1.0);
        }
        if vanish_right {
            mass_series = mass_series.mul_one_plus(-1.0);
        }
        Self { smooth, vanish_left, vanish_right, dead: Vec::new(), mass_series }
    }

    /// Samples a smooth factor `g(θ)` adaptively.
    pub fn from_smooth_fn<F>(g: F, vanish_left: bool, vanish_right: bool) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let (series, _) = CosineSeries::adaptive(g, 64, 1 << 13, 1e-14)?;
        Ok(Self::new(series, vanish_left, vanish_right))
    }

    /// Same density with `f ≡ 0` on the given subintervals of the band.
    pub fn with_dead_intervals(mut self, dead: Vec<[f64; 2]>) -> Self {
        self.dead = dead;
        self
    }

    pub fn smooth(&self) -> &CosineSeries {
        &self.smooth
    }

    pub fn vanishing(&self) -> (bool, bool) {
        (self.vanish_left, self.vanish_right)
    }

    pub fn dead_intervals(&self) -> &[[f64; 2]] {
        &self.dead
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            smooth: self.smooth.scaled(s),
            vanish_left: self.vanish_left,
            vanish_right: self.vanish_right,
            dead: self.dead.clone(),
            mass_series: self.mass_series.scaled(s),
        }
    }

    fn is_dead_at(&self, x: f64) -> bool {
        self.dead.iter().any(|d| d[0] <= x && x <= d[1])
    }

    /// Mass per unit `θ`.
    fn h(&self, theta: f64) -> f64 {
        let mut v = self.smooth.eval(theta);
        if self.vanish_left {
            let c = (0.5 * theta).cos();
            v *= 2.0 * c * c;
        }
        if self.vanish_right {
            let s = (0.5 * theta).sin();
            v *= 2.0 * s * s;
        }
        v
    }

    /// `log f` at the point with distances `dl`, `dr` to the band ends.
    fn log_density(&self, iv: &Interval, dl: f64, dr: f64) -> f64 {
        let x = iv.lo + dl;
        if self.is_dead_at(x) {
            return f64::NEG_INFINITY;
        }
        let r = iv.radius();
        let t = ((dl - dr) / (dl + dr)).clamp(-1.0, 1.0);
        let mut v = self.smooth.eval_cos(t).ln() - 0.5 * (dl * dr).ln();
        if self.vanish_left {
            v += (dl / r).ln();
        }
        if self.vanish_right {
            v += (dr / r).ln();
        }
        v
    }

    /// Live `θ`-pieces of `[0, π]` once the dead intervals are removed.
    fn live_pieces(&self, iv: &Interval) -> Vec<[f64; 2]> {
        let mut cuts: Vec<[f64; 2]> =
            self.dead.iter().map(|d| [iv.theta_of(d[1].min(iv.hi)), iv.theta_of(d[0].max(iv.lo))]).collect();
        cuts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut pieces = Vec::new();
        let mut start = 0.0;
        for c in cuts {
            if c[0] > start {
                pieces.push([start, c[0]]);
            }
            start = start.max(c[1]);
        }
        if start < PI {
            pieces.push([start, PI]);
        }
        pieces
    }

    /// Quadrature rule (θ nodes, weights already multiplied by `h`).
    fn rule(&self, iv: &Interval, n: usize) -> Vec<(f64, f64)> {
        if self.dead.is_empty() {
            let w = PI / n as f64;
            return quadrature::cosine_nodes(n).into_iter().map(|t| (t, w * self.h(t))).collect();
        }
        let pieces = self.live_pieces(iv);
        let total: f64 = pieces.iter().map(|p| p[1] - p[0]).sum();
        let mut out = Vec::with_capacity(n + 16 * pieces.len());
        for p in pieces {
            let len = p[1] - p[0];
            let np = ((n as f64 * len / total).ceil() as usize).max(16);
            let (x, w) = quadrature::gauss_legendre(np);
            for (xi, wi) in x.iter().zip(&w) {
                let t = p[0] + 0.5 * len * (xi + 1.0);
                out.push((t, 0.5 * len * wi * self.h(t)));
            }
        }
        out
    }

    fn mass(&self, iv: &Interval) -> f64 {
        if self.dead.is_empty() {
            self.mass_series.integral()
        } else {
            self.rule(iv, 1024).iter().map(|(_, w)| w).sum()
        }
    }
}

/// Probability measure `f(x) dx + Σ w_k δ_{x_k}` with `supp f ⊂ e` and
/// atoms off `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    set: FiniteGapSet,
    bands: Vec<BandDensity>,
    point_masses: Vec<PointMass>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureJson {
    bands: FiniteGapSet,
    density_coeffs: Vec<Vec<f64>>,
    #[serde(default)]
    vanishing: Vec<[bool; 2]>,
    #[serde(default)]
    dead_intervals: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    point_masses: Vec<PointMass>,
}

impl Serialize for SpectralMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureJson {
            bands: self.set.clone(),
            density_coeffs: self.bands.iter().map(|b| b.smooth.coeffs().to_vec()).collect(),
            vanishing: self.bands.iter().map(|b| [b.vanish_left, b.vanish_right]).collect(),
            dead_intervals: self.bands.iter().map(|b| b.dead.clone()).collect(),
            point_masses: self.point_masses.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MeasureJson::deserialize(d)?;
        let n = j.bands.band_count();
        let vanishing = if j.vanishing.is_empty() { vec![[false, false]; n] } else { j.vanishing };
        let dead = if j.dead_intervals.is_empty() { vec![Vec::new(); n] } else { j.dead_intervals };
        if j.density_coeffs.len() != n || vanishing.len() != n || dead.len() != n {
            return Err(serde::de::Error::custom("per-band arrays must have one entry per band"));
        }
        let bands = j
            .density_coeffs
            .into_iter()
            .zip(vanishing)
            .zip(dead)
            .map(|((c, v), d)| BandDensity::new(CosineSeries::new(c), v[0], v[1]).with_dead_intervals(d))
            .collect();
        SpectralMeasure::new(j.bands, bands, j.point_masses).map_err(serde::de::Error::custom)
    }
}

impl SpectralMeasure {
    /// Validates a measure. Total mass must be 1 within `1e-8`; use
    /// [`SpectralMeasure::normalized`] to rescale first.
    pub fn new(set: FiniteGapSet, bands: Vec<BandDensity>, point_masses: Vec<PointMass>) -> Result<Self> {
        let m = Self::unnormalized(set, bands, point_masses)?;
        let total = m.total_mass();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not 1")));
        }
        Ok(m)
    }

    /// Validates everything except the total mass and rescales to mass 1.
    pub fn normalized(set: FiniteGapSet, bands: Vec<BandDensity>, point_masses: Vec<PointMass>) -> Result<Self> {
        let m = Self::unnormalized(set, bands, point_masses)?;
        let total = m.total_mass();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::InvalidMeasure(format!("total mass {total} cannot be normalised")));
        }
        Ok(Self {
            bands: m.bands.iter().map(|b| b.scaled(1.0 / total)).collect(),
            point_masses: m
                .point_masses
                .iter()
                .map(|p| PointMass { position: p.position, weight: p.weight / total })
                .collect(),
            set: m.set,
        })
    }

    fn unnormalized(set: FiniteGapSet, bands: Vec<BandDensity>, point_masses: Vec<PointMass>) -> Result<Self> {
        if bands.len() != set.band_count() {
            return Err(Error::InvalidMeasure(format!(
                "{} band densities for {} bands",
                bands.len(),
                set.band_count()
            )));
        }
        for p in &point_masses {
            if !p.position.is_finite() || !(p.weight > 0.0) || !p.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!("bad point mass {p:?}")));
            }
            if set.contains(p.position) {
                return Err(Error::InvalidMeasure(format!("point mass at {} lies on e", p.position)));
            }
        }
        for (j, b) in bands.iter().enumerate() {
            let iv = set.band_interval(j);
            for d in &b.dead {
                if !(d[0] < d[1]) || d[0] < iv.lo || d[1] > iv.hi {
                    return Err(Error::InvalidMeasure(format!("dead interval {d:?} not inside band {}", j + 1)));
                }
            }
            for t in quadrature::cosine_nodes(64) {
                let g = b.smooth.eval(t);
                if !(g >= 0.0) {
                    return Err(Error::InvalidMeasure(format!("negative density factor {g} on band {}", j + 1)));
                }
            }
        }
        Ok(Self { set, bands, point_masses })
    }

    /// Equilibrium measure of `eq.set()`.
    pub fn equilibrium(eq: &EquilibriumData) -> Result<Self> {
        let bands = eq.band_series().iter().map(|s| BandDensity::new(s.clone(), false, false)).collect();
        Self::normalized(eq.set().clone(), bands, Vec::new())
    }

    /// Arcsine (equilibrium) measure of a single interval.
    pub fn arcsine(lo: f64, hi: f64) -> Result<Self> {
        let set = FiniteGapSet::new(&[lo, hi])?;
        Self::new(set, vec![BandDensity::new(CosineSeries::constant(1.0 / PI), false, false)], Vec::new())
    }

    /// Semicircle law on a single interval.
    pub fn semicircle(lo: f64, hi: f64) -> Result<Self> {
        let set = FiniteGapSet::new(&[lo, hi])?;
        Self::new(set, vec![BandDensity::new(CosineSeries::constant(2.0 / PI), true, true)], Vec::new())
    }

    /// `(1 - Σ w) · self + Σ w_k δ_{x_k}`.
    pub fn with_point_masses(&self, atoms: &[PointMass]) -> Result<Self> {
        let added: f64 = atoms.iter().map(|p| p.weight).sum();
        if !(added < 1.0) {
            return Err(Error::InvalidMeasure(format!("point masses carry total weight {added} ≥ 1")));
        }
        let keep = 1.0 - added;
        let mut pm: Vec<PointMass> =
            self.point_masses.iter().map(|p| PointMass { position: p.position, weight: p.weight * keep }).collect();
        pm.extend_from_slice(atoms);
        Self::new(self.set.clone(), self.bands.iter().map(|b| b.scaled(keep)).collect(), pm)
    }

    /// Same measure with the band density zeroed on `dead` (then renormalised).
    pub fn with_dead_interval(&self, dead: [f64; 2]) -> Result<Self> {
        let j = self
            .set
            .band_of_interior(0.5 * (dead[0] + dead[1]))
            .ok_or_else(|| Error::InvalidMeasure(format!("dead interval {dead:?} not inside a band")))?;
        let mut bands = self.bands.clone();
        let mut d = bands[j].dead.clone();
        d.push(dead);
        bands[j] = bands[j].clone().with_dead_intervals(d);
        Self::normalized(self.set.clone(), bands, self.point_masses.clone())
    }

    pub fn set(&self) -> &FiniteGapSet {
        &self.set
    }

    pub fn band_densities(&self) -> &[BandDensity] {
        &self.bands
    }

    pub fn point_masses(&self) -> &[PointMass] {
        &self.point_masses
    }

    pub fn has_dead_intervals(&self) -> bool {
        self.bands.iter().any(|b| !b.dead.is_empty())
    }

    pub fn total_mass(&self) -> f64 {
        let ac: f64 = self.bands.iter().enumerate().map(|(j, b)| b.mass(&self.set.band_interval(j))).sum();
        ac + self.point_masses.iter().map(|p| p.weight).sum::<f64>()
    }

    /// Density `f(x)`; zero off the bands.
    pub fn density(&self, x: f64) -> f64 {
        let Some(j) = self.set.band_of_interior(x) else {
            return 0.0;
        };
        let iv = self.set.band_interval(j);
        self.log_density_at(j, x - iv.lo, iv.hi - x).exp()
    }

    /// `log f` on band `j` at distances `dl`, `dr` from its ends.
    pub fn log_density_at(&self, j: usize, dl: f64, dr: f64) -> f64 {
        self.bands[j].log_density(&self.set.band_interval(j), dl, dr)
    }

    /// Discretisation with `n` nodes per band plus the exact atoms.
    pub fn discretize(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let (mut xs, mut ws) = self.discretize_bands(n);
        for p in &self.point_masses {
            xs.push(p.position);
            ws.push(p.weight);
        }
        (xs, ws)
    }

    /// Discretisation of the absolutely continuous part only.
    pub fn discretize_bands(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for (j, b) in self.bands.iter().enumerate() {
            let iv = self.set.band_interval(j);
            for (t, w) in b.rule(&iv, n) {
                if w > 0.0 {
                    xs.push(iv.x(t));
                    ws.push(w);
                }
            }
        }
        (xs, ws)
    }

    /// Distance from `z` to the support.
    pub fn dist_to_support(&self, z: Complex64) -> f64 {
        let mut d = f64::INFINITY;
        for b in self.set.bands() {
            let x = z.re.clamp(b[0], b[1]);
            d = d.min(Complex64::new(z.re - x, z.im).norm());
        }
        for p in &self.point_masses {
            d = d.min((z - p.position).norm());
        }
        d
    }

    /// Stieltjes transform `m(z) = ∫ dμ(x)/(x - z)`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        let d = self.dist_to_support(z);
        if d < 1e-8 {
            return Err(Error::Accuracy(format!("z = {z} is within {d:e} of the support")));
        }
        let mut m = Complex64::new(0.0, 0.0);
        for (j, b) in self.bands.iter().enumerate() {
            let iv = self.set.band_interval(j);
            m += if b.dead.is_empty() {
                band_stieltjes_closed(&b.mass_series, &iv, z)
            } else {
                band_stieltjes_quadrature(b, &iv, z)?
            };
        }
        for p in &self.point_masses {
            m += p.weight / (p.position - z);
        }
        Ok(m)
    }

    /// Boundary value `m(x + i0)` at a real point off the atoms. Needs
    /// densities without dead intervals.
    pub fn boundary_value(&self, x: f64) -> Result<Complex64> {
        let mut m = Complex64::new(0.0, 0.0);
        for (j, b) in self.bands.iter().enumerate() {
            if !b.dead.is_empty() {
                return Err(Error::Domain("boundary values need densities without dead intervals".into()));
            }
            let iv = self.set.band_interval(j);
            let w = (x - iv.center()) / iv.radius();
            m += if w.abs() < 1.0 {
                band_boundary_closed(&b.mass_series, &iv, w)
            } else if w.abs() > 1.0 {
                band_stieltjes_closed(&b.mass_series, &iv, Complex64::new(x, 0.0))
            } else {
                return Err(Error::Domain(format!("x = {x} is a band end")));
            };
        }
        for p in &self.point_masses {
            if p.position == x {
                return Err(Error::Domain(format!("x = {x} is an atom")));
            }
            m += p.weight / (p.position - x);
        }
        Ok(m)
    }
}

/// Upper boundary value of [`band_stieltjes_closed`] at a band interior
/// point `w = cos θ`, where `ζ^{-1} = e^{-iθ}`.
fn band_boundary_closed(h: &CosineSeries, iv: &Interval, w: f64) -> Complex64 {
    let root = Complex64::new(0.0, (1.0 - w * w).sqrt());
    let inv = Complex64::new(w, 0.0) - root;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in h.coeffs() {
        acc += pow * c;
        pow *= inv;
    }
    -acc * PI / (root * iv.radius())
}

/// `∫ h(θ) dθ / (x(θ) - z)` from the cosine coefficients of `h`, using
/// `∫_0^π cos kθ/(W - cos θ) dθ = π ζ^{-k} / √(W²-1)`.
fn band_stieltjes_closed(h: &CosineSeries, iv: &Interval, z: Complex64) -> Complex64 {
    let r = iv.radius();
    let w = (z - iv.center()) / r;
    let root = (w - 1.0).sqrt() * (w + 1.0).sqrt();
    let mut inv = w - root;
    let mut root = root;
    if inv.norm() > 1.0 {
        inv = w + root;
        root = -root;
    }
    let mut pow = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in h.coeffs() {
        acc += pow * c;
        pow *= inv;
    }
    -acc * PI / (root * r)
}

fn band_stieltjes_quadrature(b: &BandDensity, iv: &Interval, z: Complex64) -> Result<Complex64> {
    let eval = |n: usize| -> Complex64 { b.rule(iv, n).into_iter().map(|(t, w)| w / (iv.x(t) - z)).sum() };
    let mut n = 256;
    let mut prev = eval(n);
    while n < 1 << 16 {
        n *= 2;
        let cur = eval(n);
        if (cur - prev).norm() <= 1e-13 * (1.0 + cur.norm()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Accuracy(format!("Stieltjes quadrature unresolved at z = {z}")))
}

/// `m(z)` for a spectral measure.
pub fn m_from_measure(mu: &SpectralMeasure, z: Complex64) -> Result<Complex64> {
    mu.stieltjes(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn closed_form_transforms() {
        let semi = SpectralMeasure::semicircle(-2.0, 2.0).unwrap();
        let m = semi.stieltjes(c(3.0, 0.0)).unwrap();
        assert!((m.re - (-3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14 && m.im.abs() < 1e-14);
        let arc = SpectralMeasure::arcsine(-2.0, 2.0).unwrap();
        let m = arc.stieltjes(c(3.0, 0.0)).unwrap();
        assert!((m.re + 1.0 / 5f64.sqrt()).abs() < 1e-14);
        // left of the band the z-like branch must still be used
        let m = arc.stieltjes(c(-3.0, 0.0)).unwrap();
        assert!((m.re - 1.0 / 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn single_atom() {
        let set = FiniteGapSet::new(&[-2.0, 2.0]).unwrap();
        let band = BandDensity::new(CosineSeries::constant(0.0), false, false);
        let mu = SpectralMeasure::new(set, vec![band], vec![PointMass { position: 3.0, weight: 1.0 }]).unwrap();
        let z = c(0.5, 1.0);
        assert!((mu.stieltjes(z).unwrap() - 1.0 / (3.0 - z)).norm() < 1e-15);
        assert!(mu.stieltjes(c(3.0, 1e-9)).is_err());
    }

    #[test]
    fn validation() {
        let semi = SpectralMeasure::semicircle(-2.0, 2.0).unwrap();
        assert!(semi.with_point_masses(&[PointMass { position: 1.0, weight: 0.1 }]).is_err());
        assert!(semi.with_point_masses(&[PointMass { position: 3.0, weight: 1.0 }]).is_err());
        let set = FiniteGapSet::new(&[-2.0, 2.0]).unwrap();
        let band = BandDensity::new(CosineSeries::constant(0.5), false, false);
        assert!(SpectralMeasure::new(set.clone(), vec![band.clone()], vec![]).is_err());
        let n = SpectralMeasure::normalized(set.clone(), vec![band], vec![]).unwrap();
        assert!((n.total_mass() - 1.0).abs() < 1e-15);
        let neg = BandDensity::new(CosineSeries::new(vec![0.1, 0.5]), false, false);
        assert!(SpectralMeasure::normalized(set, vec![neg], vec![]).is_err());
    }

    #[test]
    fn dead_interval_masses_and_density() {
        let semi = SpectralMeasure::semicircle(-2.0, 2.0).unwrap();
        let dead = semi.with_dead_interval([0.0, 1.0]).unwrap();
        assert!((dead.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(dead.density(0.5), 0.0);
        assert!(dead.density(-0.5) > 0.0);
        let z = c(0.3, 0.5);
        let m = dead.stieltjes(z).unwrap();
        assert!(m.im > 0.0);
    }

    #[test]
    fn density_values() {
        let semi = SpectralMeasure::semicircle(-2.0, 2.0).unwrap();
        for x in [-1.9f64, -0.3, 0.0, 1.2, 1.999] {
            let exact = (4.0 - x * x).sqrt() / (2.0 * PI);
            assert!((semi.density(x) - exact).abs() < 1e-13 * (1.0 + exact), "x = {x}");
        }
        assert_eq!(semi.density(2.5), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let semi = SpectralMeasure::semicircle(-2.0, 2.0).unwrap();
        let mu = semi.with_point_masses(&[PointMass { position: 3.0, weight: 0.25 }]).unwrap();
        let s = serde_json::to_string(&mu).unwrap();
        assert!(s.contains("density_coeffs") && s.contains("point_masses"));
        let back: SpectralMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, mu);
    }
}
