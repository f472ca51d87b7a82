use crate::special::{norm_cdf, norm_pdf};

/// Bivariate Hüsler–Reiß `ℓ` with `η² = γ₁₂`:
/// `x₁Φ(η/2 + log(x₁/x₂)/η) + x₂Φ(η/2 + log(x₂/x₁)/η)`.
pub(crate) fn bivariate_ell(gamma12: f64, x1: f64, x2: f64) -> f64 {
    if x1 <= 0.0 || x2 <= 0.0 {
        return x1.max(x2);
    }
    let eta = gamma12.sqrt();
    if eta == 0.0 {
        return x1.max(x2);
    }
    let l = (x1 / x2).ln() / eta;
    x1 * norm_cdf(0.5 * eta + l) + x2 * norm_cdf(0.5 * eta - l)
}

/// `L̃(t) = Φ(η/2 + log t/η) + φ(η/2 + log t/η)/η − φ(η/2 − log t/η)/(η t)`,
/// so that `∂₁ℓ(x₁,x₂) = L̃(x₁/x₂)` and `∂₂ℓ(x₁,x₂) = L̃(x₂/x₁)`.
pub(crate) fn l_tilde(gamma12: f64, t: f64) -> f64 {
    let eta = gamma12.sqrt();
    if eta == 0.0 {
        return if t > 1.0 {
            1.0
        } else if t < 1.0 {
            0.0
        } else {
            0.5
        };
    }
    let l = t.ln() / eta;
    norm_cdf(0.5 * eta + l) + norm_pdf(0.5 * eta + l) / eta - norm_pdf(0.5 * eta - l) / (eta * t)
}

pub(crate) fn bivariate_gradient(gamma12: f64, x1: f64, x2: f64) -> [f64; 2] {
    [l_tilde(gamma12, x1 / x2), l_tilde(gamma12, x2 / x1)]
}
