use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::check_simplex_point;
use crate::quadrature::{inc_beta, QuadConfig};
use crate::special::ln_gamma;
use crate::subset::{check_dim, SubsetMask};

/// Parameters of the max-stable Dirichlet family, `α ∈ (0,∞)^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        check_dim(alpha.len(), 1)?;
        for (i, &a) in alpha.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::param(
                    "alpha",
                    Some(i + 1),
                    format!("must be positive and finite, got {a}"),
                ));
            }
        }
        Ok(DirichletParams { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// `α_A`; the Dirichlet family is closed under marginalization.
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
        Ok(DirichletParams {
            alpha: a.indices().map(|i| self.alpha[i]).collect(),
        })
    }

    /// Density of the angular measure on the simplex,
    /// `Γ(‖α‖₁+1)/‖αw‖₁ · Π α_i^{α_i} w_i^{α_i−1} / (Γ(α_i)‖αw‖₁^{α_i})`.
    pub fn angular_density(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        check_simplex_point(w, 1e-9)?;
        for (i, (&wi, &ai)) in w.iter().zip(&self.alpha).enumerate() {
            if wi <= 0.0 && ai < 1.0 {
                return Err(Error::Domain(format!(
                    "density is unbounded at the boundary (w_{} = 0, alpha = {ai})",
                    i + 1
                )));
            }
        }
        let total: f64 = self.alpha.iter().sum();
        let aw: f64 = self.alpha.iter().zip(w).map(|(a, x)| a * x).sum();
        let ln_aw = aw.ln();
        let mut log_h = ln_gamma(total + 1.0) - ln_aw;
        for (&a, &x) in self.alpha.iter().zip(w) {
            if x <= 0.0 {
                if a > 1.0 {
                    return Ok(0.0);
                }
                // a == 1: w^{0} = 1
                log_h += a * a.ln() - ln_gamma(a) - a * ln_aw;
                continue;
            }
            log_h += a * a.ln() + (a - 1.0) * x.ln() - ln_gamma(a) - a * ln_aw;
        }
        Ok(log_h.exp())
    }
}

/// `(H(z), H̃(z), error)` for the bivariate angular density, where
/// `H(z) = ∫₀^z h` and `H̃(z) = ∫₀^z ω h`. After the substitution
/// `r = α₁ω/(α₁ω + α₂(1−ω))` both are incomplete beta integrals:
/// `H̃ = I_r(α₁+1, α₂)` and `H − H̃ = I_r(α₁, α₂+1)`.
pub(crate) fn h_pair(a1: f64, a2: f64, z: f64, cfg: &QuadConfig) -> Result<(f64, f64, f64)> {
    let z = z.clamp(0.0, 1.0);
    let r = if z <= 0.0 {
        0.0
    } else if z >= 1.0 {
        1.0
    } else {
        a1 * z / (a1 * z + a2 * (1.0 - z))
    };
    let ht = inc_beta(a1 + 1.0, a2, r, cfg)?;
    let rest = inc_beta(a1, a2 + 1.0, r, cfg)?;
    Ok((ht.value + rest.value, ht.value, ht.error + rest.error))
}

/// Bivariate `ℓ(x₁, x₂) = x₁ − (x₁+x₂)H̃(z) + x₂H(z)` with `z = x₂/(x₁+x₂)`,
/// returning the value and an absolute error bound.
pub(crate) fn bivariate_ell(alpha: [f64; 2], x: [f64; 2], cfg: &QuadConfig) -> Result<(f64, f64)> {
    let s = x[0] + x[1];
    if s <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let (h, ht, err) = h_pair(alpha[0], alpha[1], x[1] / s, cfg)?;
    let value = x[0] - s * ht + x[1] * h;
    let bound = cfg.abs_tol.max(err) * 3.0 * s;
    Ok((value.clamp(x[0].max(x[1]), s), bound))
}

/// `(∂₁ℓ, ∂₂ℓ) = (1 − H̃(z), H(z) − H̃(z))`.
pub(crate) fn bivariate_gradient(alpha: [f64; 2], x: [f64; 2], cfg: &QuadConfig) -> Result<[f64; 2]> {
    let s = x[0] + x[1];
    let (h, ht, _) = h_pair(alpha[0], alpha[1], x[1] / s, cfg)?;
    Ok([1.0 - ht, h - ht])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn density_at_center_for_unit_alpha() {
        let p = DirichletParams::new(vec![1.0, 1.0]).unwrap();
        assert!((p.angular_density(&[0.5, 0.5]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn density_is_symmetric_for_exchangeable_alpha() {
        let p = DirichletParams::new(vec![3.0, 3.0, 3.0]).unwrap();
        let a = p.angular_density(&[0.2, 0.3, 0.5]).unwrap();
        let b = p.angular_density(&[0.5, 0.2, 0.3]).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn density_boundary_rules() {
        let p = DirichletParams::new(vec![0.5, 2.0]).unwrap();
        assert!(p.angular_density(&[0.0, 1.0]).is_err());
        assert!(p.angular_density(&[0.5, 0.6]).is_err());
        let q = DirichletParams::new(vec![2.0, 2.0]).unwrap();
        assert_eq!(q.angular_density(&[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn bivariate_density_mass_and_mean() {
        // Independent oracle: integrate the density in ω directly.
        for &(a1, a2) in &[(1.0, 1.0), (2.0, 3.0), (1.5, 4.0), (4.0, 4.0)] {
            let p = DirichletParams::new(vec![a1, a2]).unwrap();
            let f = |w: f64| p.angular_density(&[w, 1.0 - w]).unwrap();
            let cfg = QuadConfig::default();
            let mass = integrate(f, 0.0, 1.0, &cfg).unwrap().value;
            let mean = integrate(|w| w * f(w), 0.0, 1.0, &cfg).unwrap().value;
            assert!((mass - 2.0).abs() < 1e-8, "{a1},{a2}: {mass}");
            assert!((mean - 1.0).abs() < 1e-8);
            for z in [0.1, 0.35, 0.8] {
                let h = integrate(f, 0.0, z, &cfg).unwrap().value;
                let ht = integrate(|w| w * f(w), 0.0, z, &cfg).unwrap().value;
                let (hh, hht, _) = h_pair(a1, a2, z, &cfg).unwrap();
                assert!((h - hh).abs() < 1e-8);
                assert!((ht - hht).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn unit_alpha_ell_is_three_halves() {
        let (v, _) = bivariate_ell([1.0, 1.0], [1.0, 1.0], &QuadConfig::default()).unwrap();
        assert!((v - 1.5).abs() < 1e-10);
    }

    #[test]
    fn endpoint_limits() {
        let cfg = QuadConfig::default();
        let (v, _) = bivariate_ell([0.3, 2.0], [1.0, 0.0], &cfg).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let (h, ht, _) = h_pair(0.3, 2.0, 1.0, &cfg).unwrap();
        assert!((h - 2.0).abs() < 1e-12 && (ht - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cfg = QuadConfig::default();
        for &alpha in &[[0.25, 4.0], [1.0, 1.0], [30.0, 0.2]] {
            for &x in &[[1.0, 1.0], [0.3, 0.9], [2.0, 0.4]] {
                let g = bivariate_gradient(alpha, x, &cfg).unwrap();
                let h = 1e-5;
                let f = |a: f64, b: f64| bivariate_ell(alpha, [a, b], &cfg).unwrap().0;
                let d1 = (f(x[0] + h, x[1]) - f(x[0] - h, x[1])) / (2.0 * h);
                let d2 = (f(x[0], x[1] + h) - f(x[0], x[1] - h)) / (2.0 * h);
                assert!((g[0] - d1).abs() < 1e-5, "{alpha:?} {x:?}");
                assert!((g[1] - d2).abs() < 1e-5);
                // Euler's relation for 1-homogeneous functions.
                assert!((g[0] * x[0] + g[1] * x[1] - f(x[0], x[1])).abs() < 1e-9);
            }
        }
    }
}
