//! The five model families and the functionals derived from `ℓ`.

mod dirichlet;
mod husler_reiss;

use serde::Serialize;

pub use dirichlet::DirichletParams;

use crate::coeffs::{self, ChoquetModel, CoefficientTable, TableKind, DEFAULT_CHOQUET_TOL};
use crate::error::{Error, Result};
use crate::grid::{check_simplex_point, Direction};
use crate::montecarlo::{sample_generator, GeneratorSample};
use crate::quadrature::QuadConfig;
use crate::subset::{check_dim, SubsetMask};
use crate::variogram::VariogramMatrix;

pub(crate) use dirichlet::{bivariate_ell as dirichlet_ell2, bivariate_gradient as dirichlet_grad2};
pub(crate) use husler_reiss::{bivariate_ell as hr_ell2, bivariate_gradient as hr_grad2};

/// How a value was obtained, and so how far it can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Accuracy {
    Exact,
    Quadrature { tol: f64 },
    MonteCarlo { stderr: f64, n: usize },
}

impl Accuracy {
    /// Half-width used when comparing: 0, the quadrature bound, or 3·stderr.
    pub fn tolerance(&self) -> f64 {
        match *self {
            Accuracy::Exact => 0.0,
            Accuracy::Quadrature { tol } => tol,
            Accuracy::MonteCarlo { stderr, .. } => 3.0 * stderr,
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, Accuracy::MonteCarlo { .. })
    }

    /// Conservative accuracy of a sum or difference of two values.
    pub fn combine(self, other: Accuracy) -> Accuracy {
        use Accuracy::*;
        match (self, other) {
            (Exact, a) | (a, Exact) => a,
            (Quadrature { tol: a }, Quadrature { tol: b }) => Quadrature { tol: a + b },
            (MonteCarlo { stderr, n }, Quadrature { tol }) | (Quadrature { tol }, MonteCarlo { stderr, n }) => {
                MonteCarlo {
                    stderr: stderr + tol / 3.0,
                    n,
                }
            }
            (MonteCarlo { stderr: a, n: na }, MonteCarlo { stderr: b, n: nb }) => MonteCarlo {
                stderr: a + b,
                n: na.max(nb),
            },
        }
    }
}

/// A value of `ℓ` (or a functional of it) with its accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EllValue {
    pub value: f64,
    pub accuracy: Accuracy,
}

impl EllValue {
    pub fn exact(value: f64) -> Self {
        EllValue {
            value,
            accuracy: Accuracy::Exact,
        }
    }
}

/// Knobs for evaluations that are not exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalOptions {
    pub mc_n: usize,
    pub seed: u64,
    pub quad_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            mc_n: 100_000,
            seed: 0,
            quad_tol: 1e-10,
        }
    }
}

impl EvalOptions {
    pub fn quad_config(&self) -> QuadConfig {
        QuadConfig {
            abs_tol: self.quad_tol,
            ..QuadConfig::default()
        }
    }
}

/// A validated max-stable dependence model.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Independent { dim: usize },
    FullyDependent { dim: usize },
    Dirichlet(DirichletParams),
    HuslerReiss(VariogramMatrix),
    Choquet(ChoquetModel),
}

fn check_point(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    for (i, &v) in x.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::param(
                "x",
                Some(i + 1),
                format!("must be nonnegative and finite, got {v}"),
            ));
        }
    }
    Ok(())
}

impl ModelSpec {
    pub fn independent(d: usize) -> Result<Self> {
        check_dim(d, 1)?;
        Ok(ModelSpec::Independent { dim: d })
    }

    pub fn fully_dependent(d: usize) -> Result<Self> {
        check_dim(d, 1)?;
        Ok(ModelSpec::FullyDependent { dim: d })
    }

    pub fn dirichlet(alpha: Vec<f64>) -> Result<Self> {
        Ok(ModelSpec::Dirichlet(DirichletParams::new(alpha)?))
    }

    pub fn husler_reiss(gamma: Vec<Vec<f64>>) -> Result<Self> {
        Ok(ModelSpec::HuslerReiss(VariogramMatrix::new(gamma)?))
    }

    /// Choquet model from a table of any kind, validated at the default
    /// tolerance.
    pub fn choquet(table: &CoefficientTable) -> Result<Self> {
        coeffs::validate_choquet(table, DEFAULT_CHOQUET_TOL)
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Independent { dim } | ModelSpec::FullyDependent { dim } => *dim,
            ModelSpec::Dirichlet(p) => p.dim(),
            ModelSpec::HuslerReiss(g) => g.dim(),
            ModelSpec::Choquet(c) => c.dim(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Independent { .. } => "independent",
            ModelSpec::FullyDependent { .. } => "dependent",
            ModelSpec::Dirichlet(_) => "dirichlet",
            ModelSpec::HuslerReiss(_) => "husler_reiss",
            ModelSpec::Choquet(_) => "choquet",
        }
    }

    /// Spectrally discrete models, whose `θ` table is known exactly (up to
    /// recorded Monte Carlo provenance).
    pub fn is_choquet_family(&self) -> bool {
        matches!(
            self,
            ModelSpec::Independent { .. } | ModelSpec::FullyDependent { .. } | ModelSpec::Choquet(_)
        )
    }

    /// True when `ℓ` on `d` positive components needs Monte Carlo.
    pub fn needs_monte_carlo(&self) -> bool {
        matches!(self, ModelSpec::Dirichlet(_) | ModelSpec::HuslerReiss(_)) && self.dim() >= 3
    }

    /// The `θ` table of a Choquet-family model.
    pub fn theta_table(&self) -> Option<CoefficientTable> {
        let d = self.dim();
        match self {
            ModelSpec::Independent { .. } => {
                CoefficientTable::from_fn(TableKind::Theta, d, |a| a.len() as f64).ok()
            }
            ModelSpec::FullyDependent { .. } => CoefficientTable::from_fn(TableKind::Theta, d, |_| 1.0).ok(),
            ModelSpec::Choquet(c) => Some(c.theta().clone()),
            _ => None,
        }
    }

    /// Standard error attached to `θ(A)` for Choquet-family models.
    pub(crate) fn theta_stderr(&self, a: SubsetMask) -> f64 {
        match self {
            ModelSpec::Choquet(c) => c.theta_stderr(a),
            _ => 0.0,
        }
    }

    pub(crate) fn chi_stderr(&self, a: SubsetMask) -> f64 {
        match self {
            ModelSpec::Choquet(c) => c.chi_stderr(a),
            _ => 0.0,
        }
    }

    pub(crate) fn provenance_n(&self) -> Option<usize> {
        match self {
            ModelSpec::Choquet(c) => c.provenance().map(|p| p.n),
            _ => None,
        }
    }

    /// Draw the model's generator.
    pub fn sample(&self, n: usize, seed: u64) -> Result<GeneratorSample> {
        sample_generator(self, n, seed)
    }

    /// Stable tail dependence function `ℓ(x)` for `x ≥ 0`.
    pub fn ell(&self, x: &[f64], opts: &EvalOptions) -> Result<EllValue> {
        check_point(x, self.dim())?;
        if let Some(v) = self.ell_without_sampling(x, opts)? {
            return Ok(v);
        }
        let sample = self.mc_sample(opts)?;
        Ok(self.ell_from_sample(&sample, x))
    }

    /// `ℓ` at many points, drawing at most one Monte Carlo sample.
    pub fn ell_batch(&self, xs: &[Vec<f64>], opts: &EvalOptions) -> Result<Vec<EllValue>> {
        let mut out = Vec::with_capacity(xs.len());
        let mut sample: Option<GeneratorSample> = None;
        for x in xs {
            check_point(x, self.dim())?;
            match self.ell_without_sampling(x, opts)? {
                Some(v) => out.push(v),
                None => {
                    if sample.is_none() {
                        sample = Some(self.mc_sample(opts)?);
                    }
                    out.push(self.ell_from_sample(sample.as_ref().unwrap(), x));
                }
            }
        }
        Ok(out)
    }

    fn mc_sample(&self, opts: &EvalOptions) -> Result<GeneratorSample> {
        if opts.mc_n == 0 {
            return Err(Error::Domain("Monte Carlo sample size must be positive".into()));
        }
        sample_generator(self, opts.mc_n, opts.seed)
    }

    pub(crate) fn ell_from_sample(&self, sample: &GeneratorSample, x: &[f64]) -> EllValue {
        let est = sample.ell_estimate(x);
        EllValue {
            value: est.mean,
            accuracy: Accuracy::MonteCarlo {
                stderr: est.stderr,
                n: est.n,
            },
        }
    }

    /// `ℓ(x)` when a closed form or exact route exists; `None` when the
    /// value has to come from Monte Carlo.
    pub(crate) fn ell_without_sampling(&self, x: &[f64], opts: &EvalOptions) -> Result<Option<EllValue>> {
        let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
        if support.is_empty() {
            return Ok(Some(EllValue::exact(0.0)));
        }
        if support.len() == 1 {
            return Ok(Some(EllValue::exact(x[support[0]])));
        }
        let v = match self {
            ModelSpec::Independent { .. } => EllValue::exact(x.iter().sum()),
            ModelSpec::FullyDependent { .. } => EllValue::exact(x.iter().cloned().fold(0.0, f64::max)),
            ModelSpec::Choquet(c) => {
                let value = c.ell_spectral(x);
                match c.provenance() {
                    None => EllValue::exact(value),
                    Some(p) => EllValue {
                        value,
                        accuracy: Accuracy::MonteCarlo {
                            stderr: c.ell_layered(x).1,
                            n: p.n,
                        },
                    },
                }
            }
            ModelSpec::HuslerReiss(g) if support.len() == 2 => {
                let (i, j) = (support[0], support[1]);
                EllValue::exact(hr_ell2(g.get(i, j), x[i], x[j]))
            }
            ModelSpec::Dirichlet(p) if support.len() == 2 => {
                let (i, j) = (support[0], support[1]);
                let alpha = [p.alpha()[i], p.alpha()[j]];
                let (value, tol) = dirichlet_ell2(alpha, [x[i], x[j]], &opts.quad_config())?;
                EllValue {
                    value,
                    accuracy: Accuracy::Quadrature { tol },
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(v))
    }

    /// Exponent function `V(x) = ℓ(1/x)`; `+∞` entries contribute 0.
    pub fn exponent(&self, x: &[f64], opts: &EvalOptions) -> Result<EllValue> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut inv = Vec::with_capacity(x.len());
        for (i, &v) in x.iter().enumerate() {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::param(
                    "x",
                    Some(i + 1),
                    format!("exponent needs positive arguments, got {v}"),
                ));
            }
            inv.push(if v == f64::INFINITY { 0.0 } else { 1.0 / v });
        }
        self.ell(&inv, opts)
    }

    /// Distribution function `G(x) = exp(−V(x))`.
    pub fn cdf(&self, x: &[f64], opts: &EvalOptions) -> Result<f64> {
        Ok((-self.exponent(x, opts)?.value).exp())
    }

    fn check_subset(&self, a: SubsetMask) -> Result<()> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: a.dim(),
            });
        }
        if a.is_empty() {
            return Err(Error::EmptySubset);
        }
        Ok(())
    }

    /// `θ(A) = ℓ(e_A)`.
    pub fn extremal_coefficient(&self, a: SubsetMask, opts: &EvalOptions) -> Result<EllValue> {
        self.check_subset(a)?;
        self.ell(&a.indicator(), opts)
    }

    /// `χ(A) = E min_{i∈A} Z_i`.
    pub fn tail_dependence_coefficient(&self, a: SubsetMask, opts: &EvalOptions) -> Result<EllValue> {
        self.directional_chi(&Direction::ones(self.dim()), a, opts)
    }

    /// `χ^{(a)}(A) = Σ_{∅≠I⊂A} (−1)^{|I|+1} ℓ(a·e_I) = E min_{i∈A} a_i Z_i`.
    pub fn directional_chi(&self, a: &Direction, set: SubsetMask, opts: &EvalOptions) -> Result<EllValue> {
        self.check_subset(set)?;
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: a.dim(),
            });
        }
        if let Some(v) = self.directional_chi_without_sampling(a.as_slice(), set, opts)? {
            return Ok(v);
        }
        let sample = self.mc_sample(opts)?;
        Ok(self.directional_chi_from_sample(&sample, a.as_slice(), set))
    }

    pub(crate) fn directional_chi_from_sample(&self, sample: &GeneratorSample, a: &[f64], set: SubsetMask) -> EllValue {
        let est = sample.min_estimate(a, set);
        EllValue {
            value: est.mean,
            accuracy: Accuracy::MonteCarlo {
                stderr: est.stderr,
                n: est.n,
            },
        }
    }

    pub(crate) fn directional_chi_without_sampling(
        &self,
        a: &[f64],
        set: SubsetMask,
        opts: &EvalOptions,
    ) -> Result<Option<EllValue>> {
        let min_a = set.indices().map(|i| a[i]).fold(f64::INFINITY, f64::min);
        if set.len() == 1 {
            return Ok(Some(EllValue::exact(min_a)));
        }
        let v = match self {
            ModelSpec::Independent { .. } => EllValue::exact(0.0),
            ModelSpec::FullyDependent { .. } => EllValue::exact(min_a),
            ModelSpec::Choquet(c) => {
                let chi = c.tau().convert(TableKind::Chi).get(set);
                let value = min_a * chi;
                match c.provenance() {
                    None => EllValue::exact(value),
                    Some(p) => EllValue {
                        value,
                        accuracy: Accuracy::MonteCarlo {
                            stderr: min_a * c.chi_stderr(set),
                            n: p.n,
                        },
                    },
                }
            }
            _ if set.len() == 2 => {
                let idx: Vec<usize> = set.indices().collect();
                let mut x = vec![0.0; self.dim()];
                x[idx[0]] = a[idx[0]];
                x[idx[1]] = a[idx[1]];
                let l = self
                    .ell_without_sampling(&x, opts)?
                    .expect("bivariate closed forms exist");
                EllValue {
                    value: (a[idx[0]] + a[idx[1]] - l.value).max(0.0),
                    accuracy: l.accuracy,
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(v))
    }

    /// Pickands dependence function: `ℓ` restricted to the simplex.
    pub fn pickands(&self, w: &[f64], opts: &EvalOptions) -> Result<EllValue> {
        check_point(w, self.dim())?;
        check_simplex_point(w, 1e-9)?;
        self.ell(w, opts)
    }

    /// Law of the subvector `X_A`.
    pub fn marginalize(&self, a: SubsetMask) -> Result<ModelSpec> {
        self.check_subset(a)?;
        Ok(match self {
            ModelSpec::Independent { .. } => ModelSpec::Independent { dim: a.len() },
            ModelSpec::FullyDependent { .. } => ModelSpec::FullyDependent { dim: a.len() },
            ModelSpec::Dirichlet(p) => ModelSpec::Dirichlet(p.restrict(a)?),
            ModelSpec::HuslerReiss(g) => ModelSpec::HuslerReiss(g.restrict(a)?),
            ModelSpec::Choquet(c) => ModelSpec::Choquet(c.marginalize(a)?),
        })
    }

    /// Gradient of a bivariate `ℓ` at `x > 0` where closed forms exist.
    pub(crate) fn bivariate_gradient(&self, x: [f64; 2], opts: &EvalOptions) -> Result<Option<[f64; 2]>> {
        if self.dim() != 2 {
            return Ok(None);
        }
        Ok(match self {
            ModelSpec::HuslerReiss(g) => Some(hr_grad2(g.get(0, 1), x[0], x[1])),
            ModelSpec::Dirichlet(p) => Some(dirichlet_grad2(
                [p.alpha()[0], p.alpha()[1]],
                x,
                &opts.quad_config(),
            )?),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::norm_cdf;

    fn opts() -> EvalOptions {
        EvalOptions {
            mc_n: 20_000,
            seed: 3,
            quad_tol: 1e-10,
        }
    }

    fn exchangeable_a() -> ModelSpec {
        let tau = CoefficientTable::from_levels(TableKind::Tau, 3, &[0.3, 0.2, 0.3]).unwrap();
        ModelSpec::choquet(&tau).unwrap()
    }

    fn mask(idx: &[usize], d: usize) -> SubsetMask {
        SubsetMask::from_indices(idx, d).unwrap()
    }

    #[test]
    fn ell_anchor_values() {
        let o = opts();
        let ind = ModelSpec::independent(3).unwrap();
        assert_eq!(ind.ell(&[1.0, 1.0, 1.0], &o).unwrap().value, 3.0);
        let hr = ModelSpec::husler_reiss(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let v = hr.ell(&[1.0, 1.0], &o).unwrap();
        assert_eq!(v.accuracy, Accuracy::Exact);
        assert!((v.value - 2.0 * norm_cdf(0.5)).abs() < 1e-15);
        let dir = ModelSpec::dirichlet(vec![1.0, 1.0]).unwrap();
        assert!((dir.ell(&[1.0, 1.0], &o).unwrap().value - 1.5).abs() < 1e-10);
        let a = exchangeable_a();
        assert!((a.ell(&[1.0, 1.0, 0.0], &o).unwrap().value - 1.5).abs() < 1e-12);
        assert_eq!(a.ell(&[0.0; 3], &o).unwrap().value, 0.0);
    }

    #[test]
    fn exponent_and_cdf() {
        let o = opts();
        let inf = f64::INFINITY;
        let hr = ModelSpec::husler_reiss(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(hr.exponent(&[inf, inf], &o).unwrap().value, 0.0);
        let dep = ModelSpec::fully_dependent(2).unwrap();
        assert_eq!(dep.exponent(&[2.0, 4.0], &o).unwrap().value, 0.5);
        let ind = ModelSpec::independent(2).unwrap();
        assert_eq!(ind.exponent(&[1.0, 1.0], &o).unwrap().value, 2.0);
        assert!((ind.cdf(&[1.0, 1.0], &o).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert!((dep.cdf(&[1.0, 1.0], &o).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((hr.cdf(&[1.0, 1.0], &o).unwrap() - (-2.0 * norm_cdf(0.5)).exp()).abs() < 1e-15);
        // Unit Fréchet margins.
        let t = 2.5;
        assert!((hr.cdf(&[t, inf], &o).unwrap() - (-1.0 / t).exp()).abs() < 1e-15);
        assert!(hr.exponent(&[0.0, 1.0], &o).is_err());
    }

    #[test]
    fn coefficients() {
        let o = opts();
        let tau_d = CoefficientTable::from_levels(TableKind::Tau, 3, &[0.3, 0.0, 0.7]).unwrap();
        let d = ModelSpec::choquet(&tau_d).unwrap();
        assert!((d.extremal_coefficient(mask(&[0, 1, 2], 3), &o).unwrap().value - 1.6).abs() < 1e-12);
        let tau_b = CoefficientTable::from_levels(TableKind::Tau, 3, &[0.1, 0.3, 0.3]).unwrap();
        let b = ModelSpec::choquet(&tau_b).unwrap();
        assert!((b.tail_dependence_coefficient(mask(&[0, 1], 3), &o).unwrap().value - 0.6).abs() < 1e-12);
        let a = exchangeable_a();
        let v = a
            .directional_chi(&Direction::ones(3), mask(&[0, 1, 2], 3), &o)
            .unwrap();
        assert!((v.value - 0.3).abs() < 1e-12);
        let ind = ModelSpec::independent(3).unwrap();
        assert_eq!(ind.extremal_coefficient(mask(&[0, 1], 3), &o).unwrap().value, 2.0);
        let dir = Direction::new(vec![0.3, 2.0, 1.0]).unwrap();
        assert_eq!(ind.directional_chi(&dir, mask(&[0, 2], 3), &o).unwrap().value, 0.0);
        let dep = ModelSpec::fully_dependent(3).unwrap();
        assert_eq!(dep.tail_dependence_coefficient(mask(&[0, 2], 3), &o).unwrap().value, 1.0);
        for m in [&a, &ind, &dep] {
            assert_eq!(m.extremal_coefficient(mask(&[1], 3), &o).unwrap().value, 1.0);
        }
        assert!(a.extremal_coefficient(SubsetMask::new(0, 3).unwrap(), &o).is_err());
    }

    #[test]
    fn choquet_directional_chi_matches_inclusion_exclusion() {
        let o = opts();
        let a = exchangeable_a();
        let dir = [0.4, 1.3, 0.7];
        for bits in 1u32..8 {
            let set = SubsetMask::new(bits, 3).unwrap();
            let mut ie = 0.0;
            for i in set.subsets().skip(1) {
                let x: Vec<f64> = (0..3).map(|k| if i.contains(k) { dir[k] } else { 0.0 }).collect();
                let s = if i.len() % 2 == 1 { 1.0 } else { -1.0 };
                ie += s * a.ell(&x, &o).unwrap().value;
            }
            let v = a
                .directional_chi(&Direction::new(dir.to_vec()).unwrap(), set, &o)
                .unwrap();
            assert!((v.value - ie).abs() < 1e-12);
        }
    }

    #[test]
    fn pickands_values() {
        let o = opts();
        let dep = ModelSpec::fully_dependent(2).unwrap();
        assert_eq!(dep.pickands(&[0.5, 0.5], &o).unwrap().value, 0.5);
        let ind = ModelSpec::independent(3).unwrap();
        assert!((ind.pickands(&[0.2, 0.3, 0.5], &o).unwrap().value - 1.0).abs() < 1e-15);
        let hr = ModelSpec::husler_reiss(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(hr.pickands(&[1.0, 0.0], &o).unwrap().value, 1.0);
        assert!(hr.pickands(&[0.5, 0.6], &o).is_err());
    }

    #[test]
    fn marginalization() {
        let o = opts();
        let dir = ModelSpec::dirichlet(vec![1.5, 3.0, 12.0]).unwrap();
        let m = dir.marginalize(mask(&[0, 2], 3)).unwrap();
        assert_eq!(m, ModelSpec::dirichlet(vec![1.5, 12.0]).unwrap());
        let a = exchangeable_a();
        let m = a.marginalize(mask(&[0, 1], 3)).unwrap();
        assert!((m.ell(&[1.0, 1.0], &o).unwrap().value - 1.5).abs() < 1e-12);
        assert_eq!(a.marginalize(SubsetMask::full(3).unwrap()).unwrap(), a);
        // Consistency with zero-padding on exact routes.
        let hr = ModelSpec::husler_reiss(vec![
            vec![0.0, 1.0, 4.0],
            vec![1.0, 0.0, 1.0],
            vec![4.0, 1.0, 0.0],
        ])
        .unwrap();
        let sub = hr.marginalize(mask(&[0, 2], 3)).unwrap();
        let y = [0.7, 0.4];
        let full = hr.ell(&[0.7, 0.0, 0.4], &o).unwrap().value;
        assert!((sub.ell(&y, &o).unwrap().value - full).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_route_reports_stderr() {
        let o = opts();
        let dir = ModelSpec::dirichlet(vec![1.0, 2.0, 3.0]).unwrap();
        let v = dir.ell(&[1.0, 1.0, 1.0], &o).unwrap();
        assert!(matches!(v.accuracy, Accuracy::MonteCarlo { n: 20_000, .. }));
        let bad = EvalOptions { mc_n: 0, ..o };
        assert!(dir.ell(&[1.0, 1.0, 1.0], &bad).is_err());
        let batch = dir
            .ell_batch(&[vec![1.0, 1.0, 1.0], vec![1.0, 0.0, 0.0]], &o)
            .unwrap();
        assert_eq!(batch[0], v);
        assert_eq!(batch[1], EllValue::exact(1.0));
    }

    #[test]
    fn input_validation() {
        let o = opts();
        let ind = ModelSpec::independent(2).unwrap();
        assert!(ind.ell(&[1.0], &o).is_err());
        assert!(ind.ell(&[1.0, -1.0], &o).is_err());
        assert!(ModelSpec::dirichlet(vec![1.0, -0.5]).is_err());
        assert!(ModelSpec::independent(0).is_err());
    }
}
