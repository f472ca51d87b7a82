//! Bivariate max-zonoids: boundary curves from the envelope of the
//! supporting lines `{k : ⟨k, u(α)⟩ = ℓ(u(α))}`, polygons for Choquet
//! models, support functions and nesting.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::TableKind;
use crate::error::{Error, Result};
use crate::models::{EvalOptions, ModelSpec};
use crate::subset::SubsetMask;

/// How the partial derivatives of `ℓ` are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivatives {
    /// Closed forms where available (Hüsler–Reiß, Dirichlet).
    Analytic,
    /// Central differences with relative step 1e-6.
    FiniteDifference,
}

/// Boundary of a bivariate max-zonoid inside `[0,1]²`.
///
/// `arc` runs from the face `x₁ = 1` to the face `x₂ = 1`; the body is
/// closed by the segments through `(1,0)`, the origin and `(0,1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZonoidPolyline {
    /// Envelope angles; empty for polygons built from halfspaces.
    pub angles: Vec<f64>,
    pub arc: Vec<[f64; 2]>,
}

impl ZonoidPolyline {
    /// The closed ring `(0,0), (1,0), arc…, (0,1)`.
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        let mut v = Vec::with_capacity(self.arc.len() + 3);
        v.push([0.0, 0.0]);
        v.push([1.0, 0.0]);
        v.extend_from_slice(&self.arc);
        v.push([0.0, 1.0]);
        v
    }

    /// The zonoid of full dependence, `{k ≥ 0 : k₁ + k₂ ≤ 1}`.
    pub fn cross_polytope() -> Self {
        ZonoidPolyline {
            angles: Vec::new(),
            arc: Vec::new(),
        }
    }

    /// The zonoid of independence, `[0,1]²`.
    pub fn unit_square() -> Self {
        ZonoidPolyline {
            angles: Vec::new(),
            arc: vec![[1.0, 1.0]],
        }
    }
}

fn envelope_angles(n: usize) -> Vec<f64> {
    let eps = std::f64::consts::PI / (8.0 * n as f64);
    if n == 1 {
        return vec![0.5 * FRAC_PI_2];
    }
    (0..n)
        .map(|k| eps + (FRAC_PI_2 - 2.0 * eps) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Boundary of `K` for a smooth bivariate model at `n_angles` angles in
/// `(ε, π/2 − ε)`, `ε = π/(8·n_angles)`, via
/// `x₁ = cos α·L + sin²α·L₁ − sin α cos α·L₂` and
/// `x₂ = sin α·L − sin α cos α·L₁ + cos²α·L₂`.
pub fn envelope_bivariate(
    model: &ModelSpec,
    n_angles: usize,
    method: Derivatives,
    opts: &EvalOptions,
) -> Result<ZonoidPolyline> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: model.dim(),
        });
    }
    if model.is_choquet_family() {
        return Err(Error::Unsupported(format!(
            "{} models have piecewise-linear support functions; use bivariate_choquet_polygon",
            model.family()
        )));
    }
    if n_angles == 0 {
        return Err(Error::Domain("need at least one angle".into()));
    }
    let angles = envelope_angles(n_angles);
    let arc: Vec<[f64; 2]> = angles
        .par_iter()
        .map(|&a| {
            let (s, c) = a.sin_cos();
            let x = [c, s];
            let l = model.ell(&x, opts)?.value;
            let [l1, l2] = partials(model, x, method, opts)?;
            Ok([c * l + s * s * l1 - s * c * l2, s * l - s * c * l1 + c * c * l2])
        })
        .collect::<Result<_>>()?;
    Ok(ZonoidPolyline { angles, arc })
}

fn partials(model: &ModelSpec, x: [f64; 2], method: Derivatives, opts: &EvalOptions) -> Result<[f64; 2]> {
    if method == Derivatives::Analytic {
        if let Some(g) = model.bivariate_gradient(x, opts)? {
            return Ok(g);
        }
    }
    let mut g = [0.0; 2];
    for i in 0..2 {
        let h = 1e-6 * x[i].max(1e-3);
        let mut up = x;
        let mut dn = x;
        up[i] += h;
        dn[i] -= h;
        g[i] = (model.ell(&up, opts)?.value - model.ell(&dn, opts)?.value) / (2.0 * h);
    }
    Ok(g)
}

/// Polygon `{k ≥ 0 : k₁ ≤ 1, k₂ ≤ 1, k₁ + k₂ ≤ θ₁₂}` of a bivariate
/// Choquet-family model.
pub fn bivariate_choquet_polygon(model: &ModelSpec) -> Result<ZonoidPolyline> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: model.dim(),
        });
    }
    let theta = model
        .theta_table()
        .ok_or_else(|| Error::Unsupported(format!("{} is not a Choquet-family model", model.family())))?;
    debug_assert_eq!(theta.kind(), TableKind::Theta);
    let t = theta.get(SubsetMask::full(2)?) - 1.0;
    let arc = if t <= 1e-15 {
        Vec::new()
    } else if t >= 1.0 - 1e-15 {
        vec![[1.0, 1.0]]
    } else {
        vec![[1.0, t], [t, 1.0]]
    };
    Ok(ZonoidPolyline { angles: Vec::new(), arc })
}

/// Envelope for smooth models, polygon for Choquet-family models.
pub fn zonoid_polyline(model: &ModelSpec, n_angles: usize, opts: &EvalOptions) -> Result<ZonoidPolyline> {
    if model.is_choquet_family() {
        bivariate_choquet_polygon(model)
    } else {
        envelope_bivariate(model, n_angles, Derivatives::Analytic, opts)
    }
}

/// `max ⟨x, k⟩` over the polyline's vertices.
pub fn support_function_of_polyline(poly: &ZonoidPolyline, x: [f64; 2]) -> f64 {
    poly.vertices()
        .iter()
        .map(|k| k[0] * x[0] + k[1] * x[1])
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestingReport {
    pub nested: bool,
    /// Largest `h₁(u) − h₂(u)` over the test directions.
    pub worst_violation: f64,
    pub worst_angle: f64,
}

/// Default direction count when neither polyline carries an angle grid.
pub const NESTING_DIRECTIONS: usize = 720;

/// `K₁ ⊂ K₂` iff `h₁ ≤ h₂ + tol` in every direction; tested on the
/// envelope angles (which must agree when both carry them) plus the axes.
pub fn nesting_check(p1: &ZonoidPolyline, p2: &ZonoidPolyline, tol: f64) -> Result<NestingReport> {
    let angles = match (p1.angles.is_empty(), p2.angles.is_empty()) {
        (false, false) => {
            let same = p1.angles.len() == p2.angles.len()
                && p1.angles.iter().zip(&p2.angles).all(|(a, b)| (a - b).abs() <= 1e-15);
            if !same {
                return Err(Error::Domain("polylines use different angle grids".into()));
            }
            p1.angles.clone()
        }
        (false, true) => p1.angles.clone(),
        (true, false) => p2.angles.clone(),
        (true, true) => envelope_angles(NESTING_DIRECTIONS),
    };
    let mut worst = f64::NEG_INFINITY;
    let mut worst_angle = 0.0;
    let mut dirs = vec![0.0];
    dirs.extend(angles);
    dirs.push(FRAC_PI_2);
    for a in dirs {
        let u = [a.cos(), a.sin()];
        let v = support_function_of_polyline(p1, u) - support_function_of_polyline(p2, u);
        if v > worst {
            worst = v;
            worst_angle = a;
        }
    }
    Ok(NestingReport {
        nested: worst <= tol,
        worst_violation: worst,
        worst_angle,
    })
}

/// Minimal SVG of several zonoids in the unit square (one path each).
pub fn polylines_to_svg(polys: &[(&str, &ZonoidPolyline)], size: u32) -> String {
    let s = size as f64;
    let pad = 0.05 * s;
    let scale = s - 2.0 * pad;
    let map = |p: &[f64; 2]| (pad + p[0] * scale, s - pad - p[1] * scale);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{pad:.3}" y="{pad:.3}" width="{scale:.3}" height="{scale:.3}" fill="none" stroke="black"/>"#
    );
    for (label, poly) in polys {
        let mut d = String::new();
        for (i, p) in poly.vertices().iter().enumerate() {
            let (x, y) = map(p);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(out, r#"<path id="{label}" d="{d}" fill="none" stroke="black"/>"#);
    }
    out.push_str("</svg>\n");
    out
}
