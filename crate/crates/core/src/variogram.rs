//! Variogram matrices: symmetric, zero-diagonal, conditionally negative
//! definite. These parametrize the Hüsler–Reiß family.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result, VariogramDefect};
use crate::subset::{check_dim, SubsetMask};

/// Default CND tolerance, relative to the largest absolute entry.
pub const DEFAULT_TOL_CND: f64 = 1e-9;

/// Eigenvalues of a covariance above this negative floor are clipped to 0.
pub const PSD_CLIP: f64 = -1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct VariogramMatrix {
    gamma: DMatrix<f64>,
}

impl Serialize for VariogramMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Orthonormal basis of `{v : Σv = 0}` (Helmert contrasts), as columns.
fn helmert_basis(d: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(d, d - 1);
    for k in 1..d {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            h[(i, k - 1)] = 1.0 / norm;
        }
        h[(k, k - 1)] = -(k as f64) / norm;
    }
    h
}

/// Validate a raw matrix as a variogram. `tol_cnd` is relative to the
/// largest absolute entry.
pub fn validate_variogram(gamma: &[Vec<f64>], tol_cnd: f64) -> Result<VariogramMatrix> {
    let d = gamma.len();
    check_dim(d, 1)?;
    for (row, r) in gamma.iter().enumerate() {
        if r.len() != d {
            return Err(VariogramDefect::NotSquare {
                rows: d,
                row,
                cols: r.len(),
            }
            .into());
        }
    }
    let mut scale: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let v = gamma[i][j];
            if !v.is_finite() {
                return Err(VariogramDefect::NonFinite { i, j }.into());
            }
            scale = scale.max(v.abs());
        }
    }
    let sym_tol = 1e-12 * scale.max(1.0);
    for i in 0..d {
        if gamma[i][i].abs() > sym_tol {
            return Err(VariogramDefect::NonzeroDiagonal {
                i,
                value: gamma[i][i],
            }
            .into());
        }
        for j in (i + 1)..d {
            let (a, b) = (gamma[i][j], gamma[j][i]);
            if (a - b).abs() > sym_tol {
                return Err(VariogramDefect::Asymmetric { i, j, a, b }.into());
            }
            if a < 0.0 {
                return Err(VariogramDefect::NegativeEntry { i, j, value: a }.into());
            }
        }
    }
    let m = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            0.0
        } else {
            0.5 * (gamma[i][j] + gamma[j][i])
        }
    });
    if d >= 2 {
        let h = helmert_basis(d);
        let projected = h.transpose() * &m * &h;
        let eig = SymmetricEigen::new(projected);
        let top = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = tol_cnd * scale;
        if top > tol {
            return Err(VariogramDefect::NotConditionallyNegative { eigenvalue: top, tol }.into());
        }
    }
    Ok(VariogramMatrix { gamma: m })
}

impl VariogramMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        validate_variogram(&rows, DEFAULT_TOL_CND)
    }

    /// Bivariate variogram with `γ₁₂ = g`.
    pub fn bivariate(g: f64) -> Result<Self> {
        Self::new(vec![vec![0.0, g], vec![g, 0.0]])
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gamma[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.gamma[(i, j)]).collect())
            .collect()
    }

    /// `γ_{A×A}`; the restriction of a variogram is again a variogram.
    pub fn restrict(&self, a: SubsetMask) -> Result<Self> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: a.dim(),
            });
        }
        if a.is_empty() {
            return Err(Error::EmptySubset);
        }
        let idx: Vec<usize> = a.indices().collect();
        let k = idx.len();
        Ok(VariogramMatrix {
            gamma: DMatrix::from_fn(k, k, |i, j| self.gamma[(idx[i], idx[j])]),
        })
    }

    /// `(Σ_i)_{jk} = ½(γ_ij + γ_ik − γ_jk)`: covariance of `W` pinned to
    /// `W_i = 0`.
    pub fn anchored_covariance(&self, anchor: usize) -> Result<DMatrix<f64>> {
        let d = self.dim();
        if anchor >= d {
            return Err(Error::Domain(format!(
                "anchor {} out of range 1..={d}",
                anchor + 1
            )));
        }
        let g = &self.gamma;
        Ok(DMatrix::from_fn(d, d, |j, k| {
            0.5 * (g[(anchor, j)] + g[(anchor, k)] - g[(j, k)])
        }))
    }

    /// Symmetric square root `S` of `Σ_anchor` (`S·S = Σ`), with eigenvalues
    /// in `[PSD_CLIP, 0)` clipped to zero. The symmetric root is continuous
    /// in `γ`, which keeps common-random-number comparisons well correlated.
    pub fn anchored_factor(&self, anchor: usize) -> Result<DMatrix<f64>> {
        let sigma = self.anchored_covariance(anchor)?;
        let scale = sigma.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let eig = SymmetricEigen::new(sigma);
        let mut roots = eig.eigenvalues.clone();
        for v in roots.iter_mut() {
            if *v < PSD_CLIP * scale {
                return Err(Error::Numerical(format!(
                    "anchored covariance has eigenvalue {v:e} below the clip floor"
                )));
            }
            *v = v.max(0.0).sqrt();
        }
        let q = &eig.eigenvectors;
        Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
    }
}
