//! Decaying perturbations of Jacobi parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;

/// Which coefficients a perturbation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    A,
    B,
    Both,
}

impl Target {
    fn hits_a(self) -> bool {
        matches!(self, Target::A | Target::Both)
    }

    fn hits_b(self) -> bool {
        matches!(self, Target::B | Target::Both)
    }
}

/// `δ_n` as a function of the site index `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `c · n^{-r}`, `r > 1`.
    L1 { rate: f64, amplitude: f64 },
    /// `c · n^{-r}`, `1/2 < r ≤ 1`.
    L2NotL1 { rate: f64, amplitude: f64 },
    /// `value` at `index`, zero elsewhere.
    SingleSite { index: usize, value: f64 },
    /// `c · cos(2πθn + φ) / n^γ`, `0 < γ ≤ 1`.
    Oscillatory {
        frequency: f64,
        amplitude: f64,
        decay: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `c · u_n · n^{-r}` with `u_n` uniform on `[-1, 1]` from a seeded
    /// ChaCha8 stream (for `Both`, `a` and `b` draws alternate).
    Random { seed: u64, amplitude: f64, rate: f64 },
    /// `c · (-1)^n / log(n + 1)`.
    AlternatingLog { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub shape: Shape,
    pub target: Target,
}

/// What is known about `Σ_{n > N} |δ_n|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TailBound {
    /// Euler–Maclaurin value, error far below double precision at `N ≥ 100`.
    Exact(f64),
    /// Rigorous upper bound.
    Bound(f64),
    Divergent,
}

impl PerturbationSpec {
    pub fn new(shape: Shape, target: Target) -> Result<Self> {
        let s = Self { shape, target };
        s.validate()?;
        Ok(s)
    }

    pub fn zero() -> Self {
        Self { shape: Shape::SingleSite { index: 1, value: 0.0 }, target: Target::Both }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPerturbation(m));
        let finite = |x: f64, name: &str| -> Result<()> {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidPerturbation(format!("{name} must be finite")))
            }
        };
        match self.shape {
            Shape::L1 { rate, amplitude } => {
                finite(amplitude, "amplitude")?;
                if !(rate > 1.0) || !rate.is_finite() {
                    return bad(format!("summable decay needs rate > 1, got {rate}"));
                }
            }
            Shape::L2NotL1 { rate, amplitude } => {
                finite(amplitude, "amplitude")?;
                if !(rate > 0.5 && rate <= 1.0) {
                    return bad(format!("square-summable but not summable decay needs 1/2 < rate ≤ 1, got {rate}"));
                }
            }
            Shape::SingleSite { index, value } => {
                finite(value, "value")?;
                if index == 0 {
                    return bad("sites are numbered from 1".into());
                }
            }
            Shape::Oscillatory { frequency, amplitude, decay, phase } => {
                finite(frequency, "frequency")?;
                finite(amplitude, "amplitude")?;
                finite(phase, "phase")?;
                if !(decay > 0.0 && decay <= 1.0) {
                    return bad(format!("oscillatory decay must lie in (0, 1], got {decay}"));
                }
            }
            Shape::Random { amplitude, rate, .. } => {
                finite(amplitude, "amplitude")?;
                if !(rate > 0.0) || !rate.is_finite() {
                    return bad(format!("random envelope rate must be positive, got {rate}"));
                }
            }
            Shape::AlternatingLog { amplitude } => finite(amplitude, "amplitude")?,
        }
        Ok(())
    }

    fn envelope(&self, n: usize) -> f64 {
        let x = n as f64;
        match self.shape {
            Shape::L1 { rate, amplitude } | Shape::L2NotL1 { rate, amplitude } => amplitude * x.powf(-rate),
            Shape::SingleSite { index, value } => {
                if n == index {
                    value
                } else {
                    0.0
                }
            }
            Shape::Oscillatory { frequency, amplitude, decay, phase } => {
                amplitude * (2.0 * std::f64::consts::PI * frequency * x + phase).cos() / x.powf(decay)
            }
            Shape::Random { amplitude, rate, .. } => amplitude * x.powf(-rate),
            Shape::AlternatingLog { amplitude } => {
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                amplitude * sign / (x + 1.0).ln()
            }
        }
    }

    /// `(δa_1..δa_n, δb_1..δb_n)`.
    pub fn deltas(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut da = vec![0.0; n];
        let mut db = vec![0.0; n];
        match self.shape {
            Shape::Random { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for k in 0..n {
                    let env = self.envelope(k + 1);
                    if self.target.hits_a() {
                        da[k] = env * rng.gen_range(-1.0..=1.0);
                    }
                    if self.target.hits_b() {
                        db[k] = env * rng.gen_range(-1.0..=1.0);
                    }
                }
            }
            _ => {
                for k in 0..n {
                    let d = self.envelope(k + 1);
                    if self.target.hits_a() {
                        da[k] = d;
                    }
                    if self.target.hits_b() {
                        db[k] = d;
                    }
                }
            }
        }
        (da, db)
    }

    /// `Σ_{n > cutoff} (|δa_n| + |δb_n|)`.
    pub fn l1_tail(&self, cutoff: usize) -> TailBound {
        let copies = if self.target == Target::Both { 2.0 } else { 1.0 };
        let x = cutoff.max(1) as f64;
        match self.shape {
            Shape::L1 { rate: r, amplitude } => {
                let c = amplitude.abs();
                let tail = x.powf(1.0 - r) / (r - 1.0) - 0.5 * x.powf(-r) + r * x.powf(-r - 1.0) / 12.0
                    - r * (r + 1.0) * (r + 2.0) * x.powf(-r - 3.0) / 720.0;
                TailBound::Exact(copies * c * tail)
            }
            Shape::SingleSite { index, value } => {
                TailBound::Exact(if index > cutoff { copies * value.abs() } else { 0.0 })
            }
            Shape::Random { amplitude, rate, .. } if rate > 1.0 => {
                TailBound::Bound(copies * amplitude.abs() * x.powf(1.0 - rate) / (rate - 1.0))
            }
            Shape::L2NotL1 { amplitude, .. }
            | Shape::Oscillatory { amplitude, .. }
            | Shape::Random { amplitude, .. }
            | Shape::AlternatingLog { amplitude }
                if amplitude == 0.0 =>
            {
                TailBound::Exact(0.0)
            }
            _ => TailBound::Divergent,
        }
    }
}

/// A perturbed matrix together with the exact perturbation it carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbed {
    pub params: JacobiParams,
    pub spec: PerturbationSpec,
    pub size: usize,
    pub delta_a: Vec<f64>,
    pub delta_b: Vec<f64>,
    /// `Σ_{n ≤ size} |δa_n| + |δb_n|`.
    pub l1_head: f64,
    pub l1_tail: TailBound,
}

impl Perturbed {
    /// Full `ℓ¹` norm of the perturbation, when finite and known.
    pub fn l1_norm(&self) -> Option<f64> {
        match self.l1_tail {
            TailBound::Exact(t) | TailBound::Bound(t) => Some(self.l1_head + t),
            TailBound::Divergent => None,
        }
    }
}

/// `a_n + δa_n`, `b_n + δb_n` for `n ≤ size`; the base tail continues
/// unperturbed beyond.
pub fn apply_perturbation(base: &JacobiParams, spec: &PerturbationSpec, size: usize) -> Result<Perturbed> {
    spec.validate()?;
    let (mut a, mut b) = base.coefficients(size)?;
    let (da, db) = spec.deltas(size);
    for k in 0..size {
        a[k] += da[k];
        b[k] += db[k];
        if !(a[k] > 0.0) {
            return Err(Error::InvalidPerturbation(format!("perturbed a_{} = {} is not positive", k + 1, a[k])));
        }
    }
    let l1_head = da.iter().zip(&db).map(|(x, y)| x.abs() + y.abs()).sum();
    let params = JacobiParams::new(a, b, base.tail().clone())?;
    Ok(Perturbed { params, spec: spec.clone(), size, delta_a: da, delta_b: db, l1_head, l1_tail: spec.l1_tail(size) })
}
