//! Seeded sampling and Monte Carlo estimators.
//!
//! Estimates are reproducible bit for bit given `(n, seed)`, regardless of
//! how many threads do the work.

mod estimators;
pub mod rng;
mod samplers;

use nalgebra::DMatrix;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

pub use estimators::{GeneratorSample, McEstimate, RunningStats};
pub(crate) use estimators::{max_weighted, min_weighted};
pub use samplers::{
    sample_choquet_generator, sample_choquet_maxstable, sample_dirichlet_generator, sample_dirichlet_simplex,
    sample_gamma_generator, sample_generator, sample_hr_generator,
};

use crate::error::{Error, Result};
use crate::grid::Direction;
use crate::models::{EvalOptions, ModelSpec};
use crate::subset::SubsetMask;
use crate::variogram::VariogramMatrix;
use rng::{stream, CHUNK, TAG_MONOTONE, TAG_TRIANGULAR};

/// `E max_i x_i Z_i` over the model's generator.
pub fn estimate_ell(model: &ModelSpec, x: &[f64], n: usize, seed: u64) -> Result<McEstimate> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.len(),
        });
    }
    Ok(sample_generator(model, n, seed)?.ell_estimate(x))
}

/// `E min_{i∈A} a_i Z_i` over the model's generator.
pub fn estimate_directional_chi(
    model: &ModelSpec,
    a: &Direction,
    set: SubsetMask,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    if a.dim() != model.dim() || set.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: a.dim(),
        });
    }
    if set.is_empty() {
        return Err(Error::EmptySubset);
    }
    Ok(sample_generator(model, n, seed)?.min_estimate(a.as_slice(), set))
}

/// Convex test functions for the Gamma monotonicity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "g", rename_all = "snake_case")]
pub enum ConvexFn {
    /// `g(x) = x`
    Identity,
    /// `g(x) = −min(c, x)`
    NegMin { c: f64 },
    /// `g(x) = max(x, c)`
    MaxWith { c: f64 },
    /// `g(x) = x²`
    Square,
    /// `g(x) = |x − 1|`
    AbsDev,
}

impl ConvexFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ConvexFn::Identity => x,
            ConvexFn::NegMin { c } => -c.min(x),
            ConvexFn::MaxWith { c } => x.max(c),
            ConvexFn::Square => x * x,
            ConvexFn::AbsDev => (x - 1.0).abs(),
        }
    }

    /// The catalog used by the acceptance checks.
    pub fn catalog() -> Vec<ConvexFn> {
        vec![
            ConvexFn::NegMin { c: 1.0 },
            ConvexFn::MaxWith { c: 1.0 },
            ConvexFn::Square,
            ConvexFn::AbsDev,
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub alphas: Vec<f64>,
    pub g: ConvexFn,
    pub estimates: Vec<McEstimate>,
    /// `est[k+1] − est[k] − 3·σ_k` for each step; all ≤ 0 when it holds.
    pub margins: Vec<f64>,
    pub holds: bool,
}

/// Check that `α ↦ E g(Γ(α)/α)` is nonincreasing within 3·stderr.
pub fn gamma_monotonicity_check(alphas: &[f64], g: ConvexFn, n: usize, seed: u64) -> Result<MonotonicityReport> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    if alphas.windows(2).any(|w| !(w[0] < w[1])) || alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::param("alpha", None, "alphas must be positive and strictly increasing"));
    }
    let mut estimates = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let dist = Gamma::new(alpha, 1.0).map_err(|e| Error::param("alpha", None, e.to_string()))?;
        let chunks = n.div_ceil(CHUNK);
        let partials: Vec<RunningStats> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let rows = CHUNK.min(n - c * CHUNK);
                let mut rng = stream(seed, &[TAG_MONOTONE, c as u64]);
                let mut s = RunningStats::default();
                for _ in 0..rows {
                    s.push(g.eval(dist.sample(&mut rng) / alpha));
                }
                s
            })
            .collect();
        let mut total = RunningStats::default();
        partials.iter().for_each(|p| total.merge(p));
        estimates.push(total.estimate(seed, format!("E g(Gamma({alpha})/{alpha})")));
    }
    let margins: Vec<f64> = estimates
        .windows(2)
        .map(|w| w[1].mean - w[0].mean - 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt())
        .collect();
    let holds = margins.iter().all(|&m| m <= 1e-12);
    Ok(MonotonicityReport {
        alphas: alphas.to_vec(),
        g,
        estimates,
        margins,
        holds,
    })
}

/// One level of the triangular-array demonstration.
#[derive(Clone, Debug, Serialize)]
pub struct TriangularLevel {
    pub n: usize,
    pub u_n: f64,
    /// `(probe, empirical CDF, limiting CDF)`.
    pub probes: Vec<(Vec<f64>, f64, f64)>,
    /// Mean absolute CDF difference over the probes.
    pub discrepancy: f64,
    pub skipped: Option<String>,
}

/// Root of `√(2π)·u·e^{u²/2} = n` for `n > 1`.
pub fn gaussian_norming(n: f64) -> f64 {
    let target = n.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
    let f = |u: f64| u.ln() + 0.5 * u * u - target;
    let (mut lo, mut hi) = (1e-12, 1.0f64);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Compare maxima of `n` Gaussian vectors with correlations
/// `ρ_ij = exp(−γ_ij/(4 log n))`, rescaled as `u_n(M − u_n)`, against the
/// Hüsler–Reiß CDF with Gumbel margins, `exp(−ℓ(e^{−y}))`.
pub fn triangular_array_hr_demo(
    gamma: &VariogramMatrix,
    n_levels: &[usize],
    reps: usize,
    probes: &[Vec<f64>],
    seed: u64,
) -> Result<Vec<TriangularLevel>> {
    let d = gamma.dim();
    if reps == 0 {
        return Err(Error::Domain("reps must be at least 1".into()));
    }
    if n_levels.windows(2).any(|w| w[0] >= w[1]) || n_levels.first().is_some_and(|&n| n < 2) {
        return Err(Error::param("n_levels", None, "levels must be ascending and at least 2"));
    }
    if probes.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: probes.iter().map(|p| p.len()).find(|&l| l != d).unwrap_or(d),
        });
    }
    let model = ModelSpec::HuslerReiss(gamma.clone());
    let eval = EvalOptions {
        mc_n: 1_000_000,
        seed,
        quad_tol: 1e-12,
    };
    let limits: Vec<f64> = probes
        .iter()
        .map(|y| {
            let x: Vec<f64> = y.iter().map(|v| (-v).exp()).collect();
            model.ell(&x, &eval).map(|l| (-l.value).exp())
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n_levels.len());
    for (level, &n) in n_levels.iter().enumerate() {
        let ln_n = (n as f64).ln();
        let rho = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                1.0
            } else {
                (-gamma.get(i, j) / (4.0 * ln_n)).exp()
            }
        });
        let u = gaussian_norming(n as f64);
        let Some(chol) = rho.clone().cholesky() else {
            out.push(TriangularLevel {
                n,
                u_n: u,
                probes: Vec::new(),
                discrepancy: f64::NAN,
                skipped: Some("correlation matrix is not positive definite".into()),
            });
            continue;
        };
        let l = chol.l();
        let block = 64;
        let blocks = reps.div_ceil(block);
        let maxima: Vec<Vec<f64>> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let count = block.min(reps - b * block);
                let mut rng = stream(seed, &[TAG_TRIANGULAR, level as u64, b as u64]);
                let mut z = vec![0.0; d];
                let mut res = Vec::with_capacity(count * d);
                for _ in 0..count {
                    let mut m = vec![f64::NEG_INFINITY; d];
                    for _ in 0..n {
                        for v in z.iter_mut() {
                            *v = StandardNormal.sample(&mut rng);
                        }
                        for i in 0..d {
                            let mut y = 0.0;
                            for k in 0..=i {
                                y += l[(i, k)] * z[k];
                            }
                            if y > m[i] {
                                m[i] = y;
                            }
                        }
                    }
                    res.extend(m.iter().map(|&mi| u * (mi - u)));
                }
                res
            })
            .collect();
        let flat: Vec<f64> = maxima.into_iter().flatten().collect();
        let mut rows = Vec::with_capacity(probes.len());
        let mut disc = 0.0;
        for (y, &lim) in probes.iter().zip(&limits) {
            let hits = flat
                .chunks_exact(d)
                .filter(|r| r.iter().zip(y).all(|(v, t)| v <= t))
                .count();
            let emp = hits as f64 / reps as f64;
            disc += (emp - lim).abs();
            rows.push((y.clone(), emp, lim));
        }
        out.push(TriangularLevel {
            n,
            u_n: u,
            probes: rows,
            discrepancy: disc / probes.len().max(1) as f64,
            skipped: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{CoefficientTable, TableKind};
    use crate::models::DirichletParams;
    use crate::special::norm_cdf;

    #[test]
    fn gamma_generator_moments() {
        let p = DirichletParams::new(vec![1.0, 0.3, 5.0]).unwrap();
        let s = sample_gamma_generator(&p, 100_000, 1).unwrap();
        for m in s.column_means() {
            assert!(m.agrees_with(1.0, 5.0), "{m:?}");
        }
        let v = s.mean_of("Var Z1", |r| (r[0] - 1.0).powi(2));
        assert!((v.mean - 1.0).abs() < 0.05);
    }

    #[test]
    fn e_max_of_two_exponentials() {
        let p = DirichletParams::new(vec![1.0, 1.0]).unwrap();
        let s = sample_gamma_generator(&p, 200_000, 2).unwrap();
        assert!(s.ell_estimate(&[1.0, 1.0]).agrees_with(1.5, 3.0));
    }

    #[test]
    fn dirichlet_rows_on_simplex() {
        let p = DirichletParams::new(vec![0.5, 2.0, 3.0]).unwrap();
        let s = sample_dirichlet_simplex(&p, 1000, 4).unwrap();
        for r in s.rows() {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let g = sample_dirichlet_generator(&p, 100_000, 4).unwrap();
        for m in g.column_means() {
            assert!(m.agrees_with(1.0, 5.0));
        }
    }

    #[test]
    fn hr_generator_moments_and_bivariate_theta() {
        let g = VariogramMatrix::bivariate(1.0).unwrap();
        let s = sample_hr_generator(&g, 0, 200_000, 5).unwrap();
        for m in s.column_means() {
            assert!(m.agrees_with(1.0, 5.0), "{m:?}");
        }
        assert!(s.ell_estimate(&[1.0, 1.0]).agrees_with(2.0 * norm_cdf(0.5), 3.0));
    }

    #[test]
    fn dependent_generator_is_exact() {
        let m = ModelSpec::fully_dependent(3).unwrap();
        let e = estimate_ell(&m, &[0.2, 0.9, 0.4], 1000, 0).unwrap();
        assert_eq!(e.mean, 0.9);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn independent_generator_mean() {
        let m = ModelSpec::independent(3).unwrap();
        let e = estimate_ell(&m, &[0.2, 0.9, 0.4], 100_000, 0).unwrap();
        assert!(e.agrees_with(1.5, 4.0));
    }

    #[test]
    fn choquet_sampler_trivial_cases() {
        let ind = CoefficientTable::from_levels(TableKind::Tau, 2, &[1.0, 0.0]).unwrap();
        let s = sample_choquet_maxstable(&ind, 100_000, 9).unwrap();
        let p = s.mean_of("P(X<=1)", |r| f64::from(r[0] <= 1.0 && r[1] <= 1.0));
        assert!(p.agrees_with((-2.0f64).exp(), 4.0));
        let dep = CoefficientTable::from_levels(TableKind::Tau, 3, &[0.0, 0.0, 1.0]).unwrap();
        let s = sample_choquet_maxstable(&dep, 100, 9).unwrap();
        for r in s.rows() {
            assert!(r[0] == r[1] && r[1] == r[2]);
        }
    }

    #[test]
    fn sampling_is_thread_count_invariant() {
        let p = DirichletParams::new(vec![0.7, 2.0, 3.0]).unwrap();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sample_gamma_generator(&p, 50_000, 17).unwrap().ell_estimate(&[1.0, 0.5, 2.0]));
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| sample_gamma_generator(&p, 50_000, 17).unwrap().ell_estimate(&[1.0, 0.5, 2.0]));
        assert_eq!(serial.mean.to_bits(), parallel.mean.to_bits());
        assert_eq!(serial.stderr.to_bits(), parallel.stderr.to_bits());
    }

    #[test]
    fn monotonicity_identity_is_flat() {
        let r = gamma_monotonicity_check(&[0.5, 1.0, 2.0], ConvexFn::Identity, 50_000, 3).unwrap();
        for e in &r.estimates {
            assert!(e.agrees_with(1.0, 4.0));
        }
        assert!(gamma_monotonicity_check(&[1.0, 0.5], ConvexFn::Square, 10, 0).is_err());
    }

    #[test]
    fn norming_constant() {
        for n in [10.0, 100.0, 1e4, 1e8] {
            let u = gaussian_norming(n);
            let lhs = (2.0 * std::f64::consts::PI).sqrt() * u * (0.5 * u * u).exp();
            assert!((lhs / n - 1.0).abs() < 1e-10);
        }
    }
}
