//! Distributions of the weighted extremes `min_i a_iX_i` and `max_i a_iX_i`
//! of a simple max-stable vector, return levels, and GEV margins.
//!
//! With unit Fréchet margins, `P(max_i a_iX_i ≤ t) = exp(−ℓ(a)/t)` and, by
//! inclusion-exclusion, `P(min_i a_iX_i > t) = Σ_{∅≠I} (−1)^{|I|+1}
//! (1 − exp(−ℓ(a_I)/t))`, where `a_I` zeroes the coordinates outside `I`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Direction;
use crate::models::{EvalOptions, ModelSpec};
use crate::subset::enumerate_subsets;

/// Largest dimension for the `2^d` inclusion-exclusion sum.
pub const MAX_PROJECTION_DIM: usize = 16;
/// Points per curve.
pub const CURVE_POINTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Frechet,
    Gumbel,
}

impl Scale {
    fn apply(self, t: f64) -> f64 {
        match self {
            Scale::Frechet => t,
            Scale::Gumbel => t.ln(),
        }
    }
}

/// `ℓ(a_I)` for every nonempty `I`, with half-widths, evaluated once so
/// that the projection distributions become cheap functions of `t`.
#[derive(Clone, Debug)]
pub struct ProjectionKernel {
    weights: Vec<f64>,
    // (|I| odd, ℓ(a_I), half-width)
    terms: Vec<(bool, f64, f64)>,
    ell_full: (f64, f64),
    monte_carlo: bool,
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || t.is_nan() {
        return Err(Error::param("t", None, format!("threshold must be positive, got {t}")));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", None, format!("exceedance probability must lie in (0,1), got {p}")));
    }
    Ok(())
}

impl ProjectionKernel {
    pub fn new(model: &ModelSpec, a: &Direction, opts: &EvalOptions) -> Result<Self> {
        let d = model.dim();
        if a.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.dim(),
            });
        }
        if d > MAX_PROJECTION_DIM {
            return Err(Error::DimensionOutOfRange {
                dim: d,
                min: 1,
                max: MAX_PROJECTION_DIM,
            });
        }
        let sets = enumerate_subsets(d, true)?;
        let points: Vec<Vec<f64>> = sets
            .iter()
            .map(|s| {
                let mut x = vec![0.0; d];
                for i in s.indices() {
                    x[i] = a.as_slice()[i];
                }
                x
            })
            .collect();
        let values = model.ell_batch(&points, opts)?;
        let monte_carlo = values.iter().any(|v| v.accuracy.is_monte_carlo());
        let terms: Vec<(bool, f64, f64)> = sets
            .iter()
            .zip(&values)
            .map(|(s, v)| (s.len() % 2 == 1, v.value, v.accuracy.tolerance()))
            .collect();
        let last = values.last().expect("nonempty");
        Ok(ProjectionKernel {
            weights: a.as_slice().to_vec(),
            terms,
            ell_full: (last.value, last.accuracy.tolerance()),
            monte_carlo,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_monte_carlo(&self) -> bool {
        self.monte_carlo
    }

    /// `ℓ(a)` and its half-width.
    pub fn ell(&self) -> (f64, f64) {
        self.ell_full
    }

    /// `P(max_i a_iX_i ≤ t)`.
    pub fn cdf_max(&self, t: f64) -> f64 {
        (-self.ell_full.0 / t).exp()
    }

    /// Bounds on `P(max ≤ t)` from the half-width of `ℓ(a)`.
    pub fn cdf_max_bounds(&self, t: f64) -> (f64, f64) {
        let (l, h) = self.ell_full;
        ((-(l + h) / t).exp(), (-(l - h).max(0.0) / t).exp())
    }

    /// `P(min_i a_iX_i > t)`.
    pub fn survival_min(&self, t: f64) -> f64 {
        self.survival_with(t, 0.0).clamp(0.0, 1.0)
    }

    /// Interval bounds on the survival function. Each `ℓ(a_I)` is moved by
    /// `k` half-widths in whichever direction widens the interval.
    pub fn survival_min_bounds(&self, t: f64) -> (f64, f64) {
        (
            self.survival_with(t, -1.0).clamp(0.0, 1.0),
            self.survival_with(t, 1.0).clamp(0.0, 1.0),
        )
    }

    // sign = 0: point value; +1: upper bound; −1: lower bound.
    fn survival_with(&self, t: f64, sign: f64) -> f64 {
        let mut s = 0.0;
        for &(odd, l, h) in &self.terms {
            // 1 − e^{−ℓ/t} is increasing in ℓ.
            let shift = if odd { sign * h } else { -sign * h };
            let term = -(-(l + shift).max(0.0) / t).exp_m1();
            if odd {
                s += term;
            } else {
                s -= term;
            }
        }
        s
    }

    /// `Q(1 − p)` of the max or min projection on the requested scale.
    pub fn return_level(&self, kind: ProjectionKind, p: f64, scale: Scale) -> Result<f64> {
        check_p(p)?;
        let t = match kind {
            ProjectionKind::Max => self.ell_full.0 / -(-p).ln_1p(),
            ProjectionKind::Min => invert_decreasing(|t| self.survival_with(t, 0.0), p)?,
        };
        Ok(scale.apply(t))
    }

    /// Return-level interval induced by the half-widths of `ℓ`.
    pub fn return_level_band(&self, kind: ProjectionKind, p: f64, scale: Scale) -> Result<(f64, f64)> {
        check_p(p)?;
        let (lo, hi) = match kind {
            ProjectionKind::Max => {
                let (l, h) = self.ell_full;
                let q = -(-p).ln_1p();
                ((l - h).max(f64::MIN_POSITIVE) / q, (l + h) / q)
            }
            ProjectionKind::Min => (
                invert_decreasing(|t| self.survival_with(t, -1.0), p)?,
                invert_decreasing(|t| self.survival_with(t, 1.0), p)?,
            ),
        };
        Ok((scale.apply(lo), scale.apply(hi)))
    }
}

// Solve f(t) = p for f nonincreasing from 1 (t → 0) to 0 (t → ∞), by
// bisection on log t to relative tolerance 1e-10.
fn invert_decreasing<F: Fn(f64) -> f64>(f: F, p: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut steps = 0;
    while f(lo) < p {
        lo *= 0.5;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Numerical("return level bisection failed to bracket below".into()));
        }
    }
    steps = 0;
    while f(hi) > p {
        hi *= 2.0;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Numerical("return level bisection failed to bracket above".into()));
        }
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    while b - a > 1e-11 {
        let mid = 0.5 * (a + b);
        if f(mid.exp()) > p {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// `P(max_i a_iX_i ≤ t) = exp(−ℓ(a)/t)`.
pub fn cdf_max_projection(model: &ModelSpec, a: &Direction, t: f64, opts: &EvalOptions) -> Result<f64> {
    check_t(t)?;
    let l = model.ell(a.as_slice(), opts)?;
    Ok((-l.value / t).exp())
}

/// `P(min_i a_iX_i > t)` by inclusion-exclusion over `ℓ(a_I)`.
pub fn survival_min_projection(model: &ModelSpec, a: &Direction, t: f64, opts: &EvalOptions) -> Result<f64> {
    check_t(t)?;
    Ok(ProjectionKernel::new(model, a, opts)?.survival_min(t))
}

pub fn return_level(
    model: &ModelSpec,
    a: &Direction,
    kind: ProjectionKind,
    p: f64,
    scale: Scale,
    opts: &EvalOptions,
) -> Result<f64> {
    check_p(p)?;
    ProjectionKernel::new(model, a, opts)?.return_level(kind, p, scale)
}

/// Unit Fréchet value of a GEV(μ, σ, ξ) observation:
/// `(1 + ξ(x − μ)/σ)^{1/ξ}`, or `exp((x − μ)/σ)` when `ξ = 0`.
pub fn gev_transform(x: f64, mu: f64, sigma: f64, xi: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", None, "scale must be positive"));
    }
    if !(x.is_finite() && mu.is_finite() && xi.is_finite()) {
        return Err(Error::Domain("GEV arguments must be finite".into()));
    }
    let z = (x - mu) / sigma;
    if xi == 0.0 {
        return Ok(z.exp());
    }
    let base = 1.0 + xi * z;
    if !(base > 0.0) {
        return Err(Error::Domain(format!("x = {x} lies outside the GEV support")));
    }
    Ok(base.powf(1.0 / xi))
}

/// Inverse of [`gev_transform`].
pub fn gev_inverse(t: f64, mu: f64, sigma: f64, xi: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", None, "scale must be positive"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("Frechet value must be positive and finite, got {t}")));
    }
    if xi == 0.0 {
        return Ok(mu + sigma * t.ln());
    }
    Ok(mu + sigma * (t.powf(xi) - 1.0) / xi)
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionCurve {
    pub kind: ProjectionKind,
    pub scale: Scale,
    pub weights: Vec<f64>,
    pub family: String,
    /// `(t on the chosen scale, F(t))`.
    pub samples: Vec<(f64, f64)>,
}

/// Distribution function of the min or max projection at
/// [`CURVE_POINTS`] log-spaced thresholds in `[t_min, t_max]`.
pub fn projection_curve(
    model: &ModelSpec,
    a: &Direction,
    kind: ProjectionKind,
    scale: Scale,
    (t_min, t_max): (f64, f64),
    opts: &EvalOptions,
) -> Result<ProjectionCurve> {
    check_t(t_min)?;
    check_t(t_max)?;
    if t_max <= t_min {
        return Err(Error::Domain("t_max must exceed t_min".into()));
    }
    let k = ProjectionKernel::new(model, a, opts)?;
    let samples = log_space(t_min, t_max, CURVE_POINTS)
        .into_par_iter()
        .map(|t| {
            let f = match kind {
                ProjectionKind::Max => k.cdf_max(t),
                ProjectionKind::Min => 1.0 - k.survival_min(t),
            };
            (scale.apply(t), f)
        })
        .collect();
    Ok(ProjectionCurve {
        kind,
        scale,
        weights: a.as_slice().to_vec(),
        family: model.family().to_string(),
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnLevelCurve {
    pub kind: ProjectionKind,
    pub scale: Scale,
    pub weights: Vec<f64>,
    pub family: String,
    pub periods: Vec<f64>,
    pub levels: Vec<f64>,
    /// Bands from the half-widths of `ℓ`; equal to `levels` when exact.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Return levels for `n` log-spaced return periods in `[10, 100]`.
pub fn return_level_curve(
    model: &ModelSpec,
    a: &Direction,
    kind: ProjectionKind,
    scale: Scale,
    n: usize,
    opts: &EvalOptions,
) -> Result<ReturnLevelCurve> {
    if n == 0 {
        return Err(Error::Domain("need at least one return period".into()));
    }
    let k = ProjectionKernel::new(model, a, opts)?;
    let periods = log_space(10.0, 100.0, n);
    let rows: Vec<(f64, (f64, f64))> = periods
        .par_iter()
        .map(|&r| Ok((k.return_level(kind, 1.0 / r, scale)?, k.return_level_band(kind, 1.0 / r, scale)?)))
        .collect::<Result<_>>()?;
    Ok(ReturnLevelCurve {
        kind,
        scale,
        weights: a.as_slice().to_vec(),
        family: model.family().to_string(),
        periods,
        levels: rows.iter().map(|r| r.0).collect(),
        lower: rows.iter().map(|r| r.1 .0).collect(),
        upper: rows.iter().map(|r| r.1 .1).collect(),
    })
}
