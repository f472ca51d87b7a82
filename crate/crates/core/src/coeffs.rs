//! Choquet (Tawn–Molchanov) coefficient algebra.
//!
//! A discrete spectral model on `{1, …, d}` is described equivalently by
//! extremal coefficients `θ`, tail dependence coefficients `χ` or spectral
//! masses `τ`:
//!
//! * `χ(A) = Σ_{∅≠I⊂A} (−1)^{|I|+1} θ(I)` and the same map sends `χ` back to `θ`;
//! * `χ(A) = Σ_{K⊃A} τ(K)`;
//! * `θ(A) = Σ_{K∩A≠∅} τ(K)`.
//!
//! Tables are dense arrays over bitmasks; conversions run the zeta/Möbius
//! dynamic programs in `O(d·2^d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{EvalOptions, ModelSpec};
use crate::subset::{
    check_dim, mobius_superset, parity_sign, zeta_subset, zeta_superset, SubsetMask,
};

/// Default dimension cap for exact table algebra.
pub const EXACT_ALGEBRA_CAP: usize = 12;

/// Default tolerance for τ sign and marginal checks.
pub const DEFAULT_CHOQUET_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Theta,
    Chi,
    Tau,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Theta => "theta",
            TableKind::Chi => "chi",
            TableKind::Tau => "tau",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "theta" => Ok(TableKind::Theta),
            "chi" => Ok(TableKind::Chi),
            "tau" => Ok(TableKind::Tau),
            other => Err(Error::Parse(format!("unknown table kind {other:?}"))),
        }
    }
}

/// Values on the nonempty subsets of `{1, …, d}`, stored densely by
/// bitmask. Index 0 (the empty set) is held at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    dim: usize,
    kind: TableKind,
    values: Vec<f64>,
}

impl CoefficientTable {
    pub fn from_fn<F: FnMut(SubsetMask) -> f64>(kind: TableKind, dim: usize, mut f: F) -> Result<Self> {
        check_dim(dim, 1)?;
        let n = 1usize << dim;
        let mut values = vec![0.0; n];
        for (bits, v) in values.iter_mut().enumerate().skip(1) {
            *v = f(SubsetMask::from_raw(bits as u32, dim));
        }
        Self::from_dense(kind, dim, values)
    }

    /// `values[bits]` for every mask; `values[0]` is ignored.
    pub fn from_dense(kind: TableKind, dim: usize, mut values: Vec<f64>) -> Result<Self> {
        check_dim(dim, 1)?;
        if values.len() != 1usize << dim {
            return Err(Error::DimensionMismatch {
                expected: 1usize << dim,
                got: values.len(),
            });
        }
        for (bits, v) in values.iter().enumerate().skip(1) {
            if !v.is_finite() {
                return Err(Error::param(
                    kind.name(),
                    None,
                    format!(
                        "non-finite value at {}",
                        SubsetMask::from_raw(bits as u32, dim)
                    ),
                ));
            }
        }
        values[0] = 0.0;
        Ok(CoefficientTable { dim, kind, values })
    }

    /// Build from explicit entries; every nonempty subset must be present.
    pub fn from_entries<I>(kind: TableKind, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (SubsetMask, f64)>,
    {
        check_dim(dim, 1)?;
        let n = 1usize << dim;
        let mut values = vec![f64::NAN; n];
        for (mask, v) in entries {
            if mask.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: mask.dim(),
                });
            }
            if mask.is_empty() {
                return Err(Error::EmptySubset);
            }
            values[mask.bits() as usize] = v;
        }
        for (bits, v) in values.iter().enumerate().skip(1) {
            if v.is_nan() {
                return Err(Error::MissingEntry(
                    SubsetMask::from_raw(bits as u32, dim).to_key(),
                ));
            }
        }
        Self::from_dense(kind, dim, values)
    }

    /// Exchangeable table: `levels[k−1]` is the value on every `k`-subset.
    pub fn from_levels(kind: TableKind, dim: usize, levels: &[f64]) -> Result<Self> {
        if levels.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: levels.len(),
            });
        }
        Self::from_fn(kind, dim, |a| levels[a.len() - 1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn get(&self, a: SubsetMask) -> f64 {
        self.values[a.bits() as usize]
    }

    /// Dense values indexed by bitmask.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, f64)> + '_ {
        let d = self.dim;
        self.values
            .iter()
            .enumerate()
            .skip(1)
            .map(move |(b, &v)| (SubsetMask::from_raw(b as u32, d), v))
    }

    pub fn max_abs_diff(&self, other: &CoefficientTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Restriction to the subsets of `a`, re-indexed onto `{1, …, |a|}`.
    pub fn restrict(&self, a: SubsetMask) -> Result<CoefficientTable> {
        if a.is_empty() {
            return Err(Error::EmptySubset);
        }
        if self.kind == TableKind::Tau {
            return Err(Error::Unsupported(
                "spectral masses cannot be restricted directly; restrict theta instead".into(),
            ));
        }
        CoefficientTable::from_fn(self.kind, a.len(), |b| self.get(a.expand(b)))
    }

    fn expect_kind(&self, kind: TableKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Domain(format!(
                "expected a {} table, got {}",
                kind.name(),
                self.kind.name()
            )));
        }
        Ok(())
    }

    fn with(&self, kind: TableKind, mut values: Vec<f64>) -> CoefficientTable {
        values[0] = 0.0;
        CoefficientTable {
            dim: self.dim,
            kind,
            values,
        }
    }

    /// Convert to any other kind.
    pub fn convert(&self, to: TableKind) -> CoefficientTable {
        use TableKind::*;
        match (self.kind, to) {
            (a, b) if a == b => self.clone(),
            (Theta, Chi) | (Chi, Theta) => self.with(to, alternating_zeta(&self.values)),
            (Tau, Chi) => {
                let mut v = self.values.clone();
                zeta_superset(&mut v);
                self.with(Chi, v)
            }
            (Chi, Tau) => {
                let mut v = self.values.clone();
                mobius_superset(&mut v);
                self.with(Tau, v)
            }
            (Tau, Theta) => self.with(Theta, tau_to_theta_dense(&self.values)),
            (Theta, Tau) => self.with(Tau, theta_to_tau_dense(&self.values)),
            _ => unreachable!(),
        }
    }
}

// χ(A) = Σ_{I⊂A} (−1)^{|I|+1} f(I); an involution.
fn alternating_zeta(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(b, &x)| if b == 0 { 0.0 } else { parity_sign(b) * x })
        .collect();
    zeta_subset(&mut v);
    v
}

// θ(A) = T − Σ_{K⊂A^c} τ(K).
fn tau_to_theta_dense(tau: &[f64]) -> Vec<f64> {
    let n = tau.len();
    let full = n - 1;
    let mut z = tau.to_vec();
    z[0] = 0.0;
    zeta_subset(&mut z);
    let total = z[full];
    (0..n).map(|a| total - z[full & !a]).collect()
}

// τ(A) = Σ_{I⊂A} (−1)^{|I|+1} θ(I ∪ A^c) = −Möb_sup(θ)(A^c).
fn theta_to_tau_dense(theta: &[f64]) -> Vec<f64> {
    let n = theta.len();
    let full = n - 1;
    let mut m = theta.to_vec();
    m[0] = 0.0;
    mobius_superset(&mut m);
    (0..n).map(|a| -m[full & !a]).collect()
}

pub fn theta_to_chi(t: &CoefficientTable) -> Result<CoefficientTable> {
    t.expect_kind(TableKind::Theta)?;
    Ok(t.convert(TableKind::Chi))
}

pub fn chi_to_theta(c: &CoefficientTable) -> Result<CoefficientTable> {
    c.expect_kind(TableKind::Chi)?;
    Ok(c.convert(TableKind::Theta))
}

pub fn theta_to_tau(t: &CoefficientTable) -> Result<CoefficientTable> {
    t.expect_kind(TableKind::Theta)?;
    Ok(t.convert(TableKind::Tau))
}

pub fn tau_to_theta(m: &CoefficientTable) -> Result<CoefficientTable> {
    m.expect_kind(TableKind::Tau)?;
    Ok(m.convert(TableKind::Theta))
}

pub fn tau_to_chi(m: &CoefficientTable) -> Result<CoefficientTable> {
    m.expect_kind(TableKind::Tau)?;
    Ok(m.convert(TableKind::Chi))
}

pub fn chi_to_tau(c: &CoefficientTable) -> Result<CoefficientTable> {
    c.expect_kind(TableKind::Chi)?;
    Ok(c.convert(TableKind::Tau))
}

/// Per-subset standard errors of a Monte Carlo estimated `θ` table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaProvenance {
    /// Dense by bitmask; 0 where `θ` is exact.
    pub stderr: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    /// Tolerance the table was validated with.
    pub validation_tol: f64,
}

impl ThetaProvenance {
    pub fn max_stderr(&self) -> f64 {
        self.stderr.iter().cloned().fold(0.0, f64::max)
    }
}

/// A validated Choquet model. Canonical storage is `τ`; `θ` is cached.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoquetModel {
    tau: CoefficientTable,
    theta: CoefficientTable,
    provenance: Option<ThetaProvenance>,
}

impl ChoquetModel {
    pub fn dim(&self) -> usize {
        self.tau.dim
    }

    pub fn tau(&self) -> &CoefficientTable {
        &self.tau
    }

    pub fn theta(&self) -> &CoefficientTable {
        &self.theta
    }

    pub fn chi(&self) -> CoefficientTable {
        self.tau.convert(TableKind::Chi)
    }

    pub fn provenance(&self) -> Option<&ThetaProvenance> {
        self.provenance.as_ref()
    }

    /// Standard error of `θ(A)` (0 when exact).
    pub fn theta_stderr(&self, a: SubsetMask) -> f64 {
        self.provenance
            .as_ref()
            .map_or(0.0, |p| p.stderr[a.bits() as usize])
    }

    /// Conservative standard error of `χ(A)`: the sum over `θ(I)`, `I ⊂ A`.
    pub fn chi_stderr(&self, a: SubsetMask) -> f64 {
        match &self.provenance {
            None => 0.0,
            Some(p) => a.subsets().map(|i| p.stderr[i.bits() as usize]).sum(),
        }
    }

    /// `ℓ*(x) = Σ_A τ(A)·max_{i∈A} x_i`.
    pub fn ell_spectral(&self, x: &[f64]) -> f64 {
        let n = self.tau.values.len();
        let mut maxes = vec![0.0f64; n];
        let mut acc = 0.0;
        for bits in 1..n {
            let low = bits.trailing_zeros() as usize;
            let m = maxes[bits & (bits - 1)].max(x[low]);
            maxes[bits] = m;
            acc += self.tau.values[bits] * m;
        }
        acc
    }

    /// Layered Choquet integral `∫₀^∞ θ({i : x_i ≥ t}) dt`, plus the
    /// matching standard-error bound when `θ` carries Monte Carlo noise.
    pub fn ell_layered(&self, x: &[f64]) -> (f64, f64) {
        let d = self.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| x[j].total_cmp(&x[i]));
        let mut bits = 0usize;
        let mut value = 0.0;
        let mut se = 0.0;
        for k in 0..d {
            bits |= 1 << order[k];
            let next = if k + 1 < d { x[order[k + 1]] } else { 0.0 };
            let step = x[order[k]] - next;
            if step != 0.0 {
                value += step * self.theta.values[bits];
                if let Some(p) = &self.provenance {
                    se += step * p.stderr[bits];
                }
            }
        }
        (value, se)
    }

    /// Restriction to the components in `a`, rebuilt from restricted `θ`.
    pub fn marginalize(&self, a: SubsetMask) -> Result<ChoquetModel> {
        if a.dim() == self.dim() && a.len() == self.dim() {
            return Ok(self.clone());
        }
        let theta = self.theta.restrict(a)?;
        let tau = theta.convert(TableKind::Tau);
        let provenance = self.provenance.as_ref().map(|p| ThetaProvenance {
            stderr: (0..(1usize << a.len()))
                .map(|b| p.stderr[a.expand(SubsetMask::from_raw(b as u32, a.len())).bits() as usize])
                .collect(),
            ..p.clone()
        });
        Ok(ChoquetModel {
            tau,
            theta,
            provenance,
        })
    }
}

/// Validate a table of any kind as a Choquet model: all `τ(A) ≥ −tol` and
/// `Σ_{K∋i} τ(K) = 1 ± tol`. Tables are rejected, never repaired.
pub fn validate_choquet(table: &CoefficientTable, tol: f64) -> Result<ModelSpec> {
    Ok(ModelSpec::Choquet(choquet_model(table, tol, None)?))
}

pub(crate) fn choquet_model(
    table: &CoefficientTable,
    tol: f64,
    provenance: Option<ThetaProvenance>,
) -> Result<ChoquetModel> {
    let tau = table.convert(TableKind::Tau);
    for (a, m) in tau.iter() {
        if m < -tol {
            return Err(Error::NegativeMass {
                subset: a.to_key(),
                mass: m,
            });
        }
    }
    let chi = tau.convert(TableKind::Chi);
    for i in 0..tau.dim {
        let s = chi.values[1 << i];
        if (s - 1.0).abs() > tol {
            return Err(Error::MarginalConstraint { index: i + 1, sum: s });
        }
    }
    let theta = tau.convert(TableKind::Theta);
    Ok(ChoquetModel {
        tau,
        theta,
        provenance,
    })
}

/// The Choquet model with the same extremal coefficients as `model`.
///
/// Singletons are exactly 1, pairs use the bivariate closed forms, and
/// larger subsets of Hüsler–Reiß and Dirichlet models come from one
/// Monte Carlo sample; the table is then validated with tolerance
/// `3·max stderr` and the standard errors are kept as provenance.
pub fn associated_choquet(model: &ModelSpec, opts: &EvalOptions) -> Result<ModelSpec> {
    associated_choquet_capped(model, opts, EXACT_ALGEBRA_CAP)
}

pub fn associated_choquet_capped(model: &ModelSpec, opts: &EvalOptions, cap: usize) -> Result<ModelSpec> {
    let d = model.dim();
    if d > cap {
        return Err(Error::DimensionOutOfRange {
            dim: d,
            min: 1,
            max: cap,
        });
    }
    match model {
        ModelSpec::Choquet(_) => return Ok(model.clone()),
        ModelSpec::Independent { .. } | ModelSpec::FullyDependent { .. } => {
            let theta = model
                .theta_table()
                .expect("independent and fully dependent tables are exact");
            return validate_choquet(&theta, DEFAULT_CHOQUET_TOL);
        }
        _ => {}
    }
    let n = 1usize << d;
    let mut theta = vec![0.0; n];
    let mut stderr = vec![0.0; n];
    let mut quad = 0.0f64;
    let mut large: Vec<SubsetMask> = Vec::new();
    for bits in 1..n {
        let a = SubsetMask::from_raw(bits as u32, d);
        match a.len() {
            1 => theta[bits] = 1.0,
            2 => {
                let v = model.ell(&a.indicator(), opts)?;
                quad = quad.max(v.accuracy.tolerance());
                theta[bits] = v.value;
            }
            _ => large.push(a),
        }
    }
    let mut mc_n = 0;
    if !large.is_empty() {
        if opts.mc_n == 0 {
            return Err(Error::Domain("Monte Carlo sample size must be positive".into()));
        }
        let sample = crate::montecarlo::sample_generator(model, opts.mc_n, opts.seed)?;
        let masks: Vec<Vec<usize>> = large.iter().map(|a| a.indices().collect()).collect();
        let stats = sample.mean_of_many(masks.len(), |row, out| {
            for (o, idx) in out.iter_mut().zip(&masks) {
                *o = idx.iter().map(|&i| row[i]).fold(0.0, f64::max);
            }
        });
        for (a, s) in large.iter().zip(stats) {
            theta[a.bits() as usize] = s.mean();
            stderr[a.bits() as usize] = s.stderr();
        }
        mc_n = opts.mc_n;
    }
    let max_se = stderr.iter().cloned().fold(0.0, f64::max);
    let tol = DEFAULT_CHOQUET_TOL + quad * d as f64 + 3.0 * max_se;
    let table = CoefficientTable::from_dense(TableKind::Theta, d, theta)?;
    let provenance = if large.is_empty() {
        None
    } else {
        Some(ThetaProvenance {
            stderr,
            n: mc_n,
            seed: opts.seed,
            validation_tol: tol,
        })
    };
    Ok(ModelSpec::Choquet(choquet_model(&table, tol, provenance)?))
}

/// `K* = {k ≥ 0 : ⟨k, e_A⟩ ≤ θ(A)}` as (normal, offset) pairs.
pub fn choquet_zonoid_halfspaces(theta: &CoefficientTable) -> Result<Vec<(Vec<f64>, f64)>> {
    theta.expect_kind(TableKind::Theta)?;
    Ok(theta.iter().map(|(a, v)| (a.indicator(), v)).collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn exchangeable(row: char) -> CoefficientTable {
        let levels = match row {
            'A' => [0.3, 0.2, 0.3],
            'B' => [0.1, 0.3, 0.3],
            'C' => [0.4, 0.1, 0.4],
            'D' => [0.3, 0.0, 0.7],
            _ => unreachable!(),
        };
        CoefficientTable::from_levels(TableKind::Tau, 3, &levels).unwrap()
    }

    fn full(d: usize) -> SubsetMask {
        SubsetMask::full(d).unwrap()
    }

    fn pair() -> SubsetMask {
        SubsetMask::from_indices(&[0, 1], 3).unwrap()
    }

    // Naive O(3^d) conversions straight from the defining sums.
    fn naive_tau_to_theta(tau: &CoefficientTable) -> Vec<f64> {
        let d = tau.dim();
        (0..(1usize << d))
            .map(|a| {
                (1..(1usize << d))
                    .filter(|k| k & a != 0)
                    .map(|k| tau.values()[k])
                    .sum()
            })
            .collect()
    }

    fn naive_theta_to_tau(theta: &[f64], d: usize) -> Vec<f64> {
        let full = (1usize << d) - 1;
        (0..(1usize << d))
            .map(|a| {
                if a == 0 {
                    return 0.0;
                }
                let comp = full & !a;
                (0..=a)
                    .filter(|i| i & !a == 0)
                    .map(|i| parity_sign(i) * theta[i | comp])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn exchangeable_columns() {
        let expect = [
            ('A', 0.5, 0.3, 1.5, 1.8),
            ('B', 0.6, 0.3, 1.4, 1.5),
            ('C', 0.5, 0.4, 1.5, 1.9),
            ('D', 0.7, 0.7, 1.3, 1.6),
        ];
        for (row, chi12, chi123, th12, th123) in expect {
            let tau = exchangeable(row);
            let chi = tau_to_chi(&tau).unwrap();
            let theta = tau_to_theta(&tau).unwrap();
            assert!((chi.get(pair()) - chi12).abs() < 1e-12, "{row}");
            assert!((chi.get(full(3)) - chi123).abs() < 1e-12, "{row}");
            assert!((theta.get(pair()) - th12).abs() < 1e-12, "{row}");
            assert!((theta.get(full(3)) - th123).abs() < 1e-12, "{row}");
            validate_choquet(&tau, 1e-9).unwrap();
        }
    }

    #[test]
    fn theta_to_tau_exchangeable_model_a() {
        let theta = CoefficientTable::from_levels(TableKind::Theta, 3, &[1.0, 1.5, 1.8]).unwrap();
        let tau = theta_to_tau(&theta).unwrap();
        let s = SubsetMask::from_indices(&[0], 3).unwrap();
        assert!((tau.get(s) - 0.3).abs() < 1e-12);
        assert!((tau.get(pair()) - 0.2).abs() < 1e-12);
        assert!((tau.get(full(3)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn trivial_tables() {
        for d in 1..=5 {
            let indep = CoefficientTable::from_fn(TableKind::Theta, d, |a| a.len() as f64).unwrap();
            let chi = theta_to_chi(&indep).unwrap();
            let tau = theta_to_tau(&indep).unwrap();
            for (a, v) in chi.iter() {
                assert_eq!(v, if a.len() == 1 { 1.0 } else { 0.0 });
                let t = tau.get(a);
                assert!((t - if a.len() == 1 { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
            let dep = CoefficientTable::from_fn(TableKind::Theta, d, |_| 1.0).unwrap();
            let chi = theta_to_chi(&dep).unwrap();
            assert!(chi.iter().all(|(_, v)| (v - 1.0).abs() < 1e-12));
            let tau = theta_to_tau(&dep).unwrap();
            for (a, v) in tau.iter() {
                let expect = if a == full(d) { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        assert!(theta_to_chi(&exchangeable('A')).is_err());
        assert!(tau_to_chi(&exchangeable('A')).is_ok());
    }

    #[test]
    fn negative_mass_is_reported() {
        let theta = CoefficientTable::from_fn(TableKind::Theta, 3, |a| match a.len() {
            1 => 1.0,
            _ => 2.0,
        })
        .unwrap();
        let tau = theta_to_tau(&theta).unwrap();
        // Independent oracle for the full-set mass: Σ_{I} (−1)^{|I|+1} θ(I).
        let mass = 3.0 * 1.0 - 3.0 * 2.0 + 2.0;
        assert!((tau.get(full(3)) - mass).abs() < 1e-12);
        assert!(mass < 0.0);
        let err = validate_choquet(&theta, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NegativeMass { .. }));
    }

    #[test]
    fn marginal_violation_is_reported() {
        let tau = CoefficientTable::from_levels(TableKind::Tau, 2, &[0.5, 0.6]).unwrap();
        let err = validate_choquet(&tau, 1e-9).unwrap_err();
        assert!(matches!(err, Error::MarginalConstraint { index: 1, .. }));
    }

    #[test]
    fn ell_forms_agree_and_match_bivariate_formula() {
        let theta = CoefficientTable::from_levels(TableKind::Theta, 2, &[1.0, 1.5]).unwrap();
        let ModelSpec::Choquet(m) = validate_choquet(&theta, 1e-9).unwrap() else {
            unreachable!()
        };
        for &(x1, x2) in &[(1.0, 1.0), (0.3, 2.0), (5.0, 0.1), (0.0, 1.0)] {
            let expect = f64::max(x1 + 0.5 * x2, 0.5 * x1 + x2);
            assert!((m.ell_spectral(&[x1, x2]) - expect).abs() < 1e-12);
            assert!((m.ell_layered(&[x1, x2]).0 - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn ell_at_indicator_is_theta() {
        let ModelSpec::Choquet(m) = validate_choquet(&exchangeable('A'), 1e-9).unwrap() else {
            unreachable!()
        };
        assert!((m.ell_spectral(&[1.0, 1.0, 1.0]) - 1.8).abs() < 1e-12);
        for (a, th) in m.theta().iter() {
            assert!((m.ell_spectral(&a.indicator()) - th).abs() < 1e-12);
        }
    }

    #[test]
    fn halfspaces() {
        let theta = CoefficientTable::from_levels(TableKind::Theta, 2, &[1.0, 1.5]).unwrap();
        let h = choquet_zonoid_halfspaces(&theta).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h[2], (vec![1.0, 1.0], 1.5));
        // The pentagon's vertices satisfy every halfspace; (1,1) does not.
        for v in [[1.0, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 1.0], [0.0, 0.0]] {
            assert!(h.iter().all(|(n, o)| n[0] * v[0] + n[1] * v[1] <= o + 1e-12));
        }
        assert!(h.iter().any(|(n, o)| n[0] + n[1] > *o));
    }

    #[test]
    fn marginalize_rebuilds_from_theta() {
        let ModelSpec::Choquet(m) = validate_choquet(&exchangeable('A'), 1e-9).unwrap() else {
            unreachable!()
        };
        let sub = m.marginalize(SubsetMask::from_indices(&[0, 1], 3).unwrap()).unwrap();
        assert_eq!(sub.dim(), 2);
        assert!((sub.theta().get(SubsetMask::full(2).unwrap()) - 1.5).abs() < 1e-12);
        // Restricting τ directly would give the wrong masses.
        assert!((sub.tau().get(SubsetMask::full(2).unwrap()) - 0.5).abs() < 1e-12);
    }

    fn random_tau(d: usize) -> impl Strategy<Value = CoefficientTable> {
        proptest::collection::vec(0.0f64..1.0, (1usize << d) - 1).prop_map(move |w| {
            // Normalize so that every component has total mass 1.
            let mut raw = vec![0.0];
            raw.extend(w);
            let mut per: Vec<f64> = vec![0.0; d];
            for (b, v) in raw.iter().enumerate() {
                for (i, p) in per.iter_mut().enumerate() {
                    if b & (1 << i) != 0 {
                        *p += v;
                    }
                }
            }
            // Scale each mass by the largest per-component total it touches
            // and top singletons up to exactly 1.
            let s = per.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let mut tau: Vec<f64> = raw.iter().map(|v| v / s).collect();
            for i in 0..d {
                let tot: f64 = (1..tau.len()).filter(|b| b & (1 << i) != 0).map(|b| tau[b]).sum();
                tau[1 << i] += 1.0 - tot;
            }
            CoefficientTable::from_dense(TableKind::Tau, d, tau).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn fast_conversions_match_naive_sums(tau in (2usize..=6).prop_flat_map(random_tau)) {
            let d = tau.dim();
            validate_choquet(&tau, 1e-9).unwrap();
            let theta = tau_to_theta(&tau).unwrap();
            let naive = naive_tau_to_theta(&tau);
            for b in 1..(1usize << d) {
                prop_assert!((theta.values()[b] - naive[b]).abs() < 1e-12);
            }
            let back = naive_theta_to_tau(theta.values(), d);
            for b in 1..(1usize << d) {
                prop_assert!((tau.values()[b] - back[b]).abs() < 1e-12);
            }
            let via = theta_to_tau(&theta).unwrap();
            prop_assert!(via.max_abs_diff(&tau) < 1e-12);
        }

        #[test]
        fn spectral_and_layered_agree(tau in (2usize..=5).prop_flat_map(random_tau),
                                      x in proptest::collection::vec(0.0f64..5.0, 5)) {
            let ModelSpec::Choquet(m) = validate_choquet(&tau, 1e-9).unwrap() else { unreachable!() };
            let x = &x[..m.dim()];
            prop_assert!((m.ell_spectral(x) - m.ell_layered(x).0).abs() < 1e-12);
        }
    }
}
