//! Lower orthant, upper orthant and PQD (concordance) orders.
//!
//! Conventions: `m1 ≤_lo m2` means `ℓ₁ ≤ ℓ₂` (equivalently `G₁ ≥ G₂`),
//! `m1 ≤_uo m2` means `E min_{i∈A} a_iZ_i` is smaller under `m1` for every
//! `a` and `A`, and `m1 ≤_pqd m2` is `m1 ≤_uo m2` together with
//! `m2 ≤_lo m1`.
//!
//! Pairs of Choquet-family models are decided exactly from their `θ` and
//! `χ` tables. Everything else is compared on a simplex direction grid,
//! which certifies the order only up to the grid's resolution.

use serde::Serialize;

use crate::coeffs::{CoefficientTable, TableKind};
use crate::error::{Error, Result};
use crate::grid::SimplexGrid;
use crate::models::{Accuracy, EllValue, EvalOptions, ModelSpec};
use crate::montecarlo::{max_weighted, min_weighted, GeneratorSample};
use crate::subset::{enumerate_subsets, SubsetMask};

/// Absolute slack on every comparison.
pub const EXACT_TOL: f64 = 1e-9;
/// Witnesses kept per direction.
pub const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Lo,
    Uo,
    Pqd,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Lo => "lo",
            Relation::Uo => "uo",
            Relation::Pqd => "pqd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lo" => Ok(Relation::Lo),
            "uo" => Ok(Relation::Uo),
            "pqd" => Ok(Relation::Pqd),
            other => Err(Error::Parse(format!("unknown relation `{other}` (expected lo, uo or pqd)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// `m1 ≤ m2`.
    Holds,
    /// `m2 ≤ m1` (and not `m1 ≤ m2`).
    HoldsReversed,
    Incomparable,
    /// Every comparison fell inside its Monte Carlo band.
    Inconclusive,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::HoldsReversed => "holds_reversed",
            Outcome::Incomparable => "incomparable",
            Outcome::Inconclusive => "inconclusive",
        }
    }

    /// Process exit code for command-line use.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Holds => 0,
            Outcome::HoldsReversed | Outcome::Incomparable => 1,
            Outcome::Inconclusive => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    GridCertificate,
    MonteCarlo,
}

/// Which claim a witness refutes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `lhs > rhs + tolerance`: refutes `m1 ≤ m2`.
    Violation,
    /// `lhs < rhs − tolerance`: refutes `m2 ≤ m1`.
    Reverse,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    /// The sub-check the witness comes from (`lo` or `uo` inside `pqd`).
    pub relation: Relation,
    /// Direction `a` (grid route) or subset indicator (table route).
    pub point: Vec<f64>,
    pub subset: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridDescriptor {
    pub dim: usize,
    pub m: usize,
    pub points: usize,
    pub clip: f64,
}

impl From<&SimplexGrid> for GridDescriptor {
    fn from(g: &SimplexGrid) -> Self {
        GridDescriptor {
            dim: g.dim,
            m: g.m,
            points: g.len(),
            clip: g.clip(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub outcome: Outcome,
    pub exactness: Exactness,
    pub grid: Option<GridDescriptor>,
    pub comparisons: usize,
    pub violations: usize,
    pub reverse: usize,
    /// Largest `lhs − rhs − tol`; positive iff some violation.
    pub worst_violation: f64,
    /// Largest `rhs − lhs − tol`; positive iff some reverse evidence.
    pub worst_reverse: f64,
    pub witnesses: Vec<Witness>,
    pub mc_n: Option<usize>,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn witnesses_of(&self, kind: WitnessKind) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(move |w| w.kind == kind)
    }
}

struct Comparison {
    point: Vec<f64>,
    subset: Option<SubsetMask>,
    lhs: f64,
    rhs: f64,
    tol: f64,
}

#[derive(Default)]
struct Tally {
    comparisons: usize,
    violations: usize,
    reverse: usize,
    worst_violation: f64,
    worst_reverse: f64,
    kept_violation: Vec<Witness>,
    kept_reverse: Vec<Witness>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            worst_violation: f64::NEG_INFINITY,
            worst_reverse: f64::NEG_INFINITY,
            ..Tally::default()
        }
    }

    fn add(&mut self, relation: Relation, c: &Comparison) {
        self.comparisons += 1;
        let up = c.lhs - c.rhs - c.tol;
        let down = c.rhs - c.lhs - c.tol;
        self.worst_violation = self.worst_violation.max(up);
        self.worst_reverse = self.worst_reverse.max(down);
        let witness = |kind| Witness {
            kind,
            relation,
            point: c.point.clone(),
            subset: c.subset.map(|s| s.to_key()),
            lhs: c.lhs,
            rhs: c.rhs,
            tolerance: c.tol,
        };
        if up > 0.0 {
            self.violations += 1;
            keep_worst(&mut self.kept_violation, witness(WitnessKind::Violation), up);
        } else if down > 0.0 {
            self.reverse += 1;
            keep_worst(&mut self.kept_reverse, witness(WitnessKind::Reverse), down);
        }
    }

    fn finish(
        self,
        relation: Relation,
        exactness: Exactness,
        grid: Option<GridDescriptor>,
        opts: &EvalOptions,
        notes: Vec<String>,
    ) -> OrderVerdict {
        let outcome = match (self.violations > 0, self.reverse > 0) {
            (true, true) => Outcome::Incomparable,
            (true, false) => Outcome::HoldsReversed,
            (false, true) => Outcome::Holds,
            (false, false) if exactness == Exactness::MonteCarlo => Outcome::Inconclusive,
            (false, false) => Outcome::Holds,
        };
        let mc = exactness == Exactness::MonteCarlo;
        let mut witnesses = self.kept_violation;
        witnesses.extend(self.kept_reverse);
        OrderVerdict {
            relation,
            outcome,
            exactness,
            grid,
            comparisons: self.comparisons,
            violations: self.violations,
            reverse: self.reverse,
            worst_violation: self.worst_violation,
            worst_reverse: self.worst_reverse,
            witnesses,
            mc_n: mc.then_some(opts.mc_n),
            seed: mc.then_some(opts.seed),
            notes,
        }
    }
}

// Keep the MAX_WITNESSES largest margins, in first-seen order among ties.
fn keep_worst(kept: &mut Vec<Witness>, w: Witness, margin: f64) {
    let m = |w: &Witness| match w.kind {
        WitnessKind::Violation => w.lhs - w.rhs - w.tolerance,
        WitnessKind::Reverse => w.rhs - w.lhs - w.tolerance,
    };
    if kept.len() < MAX_WITNESSES {
        kept.push(w);
        return;
    }
    let (idx, smallest) = kept
        .iter()
        .enumerate()
        .map(|(i, k)| (i, m(k)))
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if margin > smallest {
        kept.remove(idx);
        kept.push(w);
    }
}

fn check_pair(m1: &ModelSpec, m2: &ModelSpec) -> Result<()> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch {
            expected: m1.dim(),
            got: m2.dim(),
        });
    }
    Ok(())
}

fn check_grid(m: &ModelSpec, grid: &SimplexGrid) -> Result<()> {
    if grid.dim != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: grid.dim,
        });
    }
    Ok(())
}

// ---------- exact route for Choquet-family pairs ----------

fn table_route(
    relation: Relation,
    lhs: (&CoefficientTable, &dyn Fn(SubsetMask) -> f64),
    rhs: (&CoefficientTable, &dyn Fn(SubsetMask) -> f64),
    tally: &mut Tally,
) {
    for (a, l) in lhs.0.iter() {
        if a.len() < 2 {
            continue;
        }
        let r = rhs.0.get(a);
        let tol = EXACT_TOL + 3.0 * (lhs.1(a).powi(2) + rhs.1(a).powi(2)).sqrt();
        tally.add(
            relation,
            &Comparison {
                point: a.indicator(),
                subset: Some(a),
                lhs: l,
                rhs: r,
                tol,
            },
        );
    }
}

fn has_provenance(m: &ModelSpec) -> bool {
    m.provenance_n().is_some()
}

fn table_exactness(m1: &ModelSpec, m2: &ModelSpec) -> Exactness {
    if has_provenance(m1) || has_provenance(m2) {
        Exactness::MonteCarlo
    } else {
        Exactness::Exact
    }
}

// `lhs ≤_lo rhs` by θ tables.
fn lo_tables(lhs: &ModelSpec, rhs: &ModelSpec, tally: &mut Tally) {
    let t1 = lhs.theta_table().expect("choquet family");
    let t2 = rhs.theta_table().expect("choquet family");
    let s1 = |a| lhs.theta_stderr(a);
    let s2 = |a| rhs.theta_stderr(a);
    table_route(Relation::Lo, (&t1, &s1), (&t2, &s2), tally);
}

// `lhs ≤_uo rhs` by χ tables.
fn uo_tables(lhs: &ModelSpec, rhs: &ModelSpec, tally: &mut Tally) {
    let c1 = lhs.theta_table().expect("choquet family").convert(TableKind::Chi);
    let c2 = rhs.theta_table().expect("choquet family").convert(TableKind::Chi);
    let s1 = |a| lhs.chi_stderr(a);
    let s2 = |a| rhs.chi_stderr(a);
    table_route(Relation::Uo, (&c1, &s1), (&c2, &s2), tally);
}

// ---------- grid route ----------

#[derive(Clone)]
struct Query {
    point: Vec<f64>,
    set: Option<SubsetMask>,
    // Indices of `set`, cached for the sample pass.
    idx: Vec<usize>,
}

impl Query {
    fn eval_row(&self, row: &[f64]) -> f64 {
        match self.set {
            None => max_weighted(row, &self.point),
            Some(_) => min_weighted(row, &self.point, &self.idx),
        }
    }
}

fn closed_value(m: &ModelSpec, q: &Query, opts: &EvalOptions) -> Result<Option<EllValue>> {
    match q.set {
        None => m.ell_without_sampling(&q.point, opts),
        Some(s) => m.directional_chi_without_sampling(&q.point, s, opts),
    }
}

fn split_tol(acc: &Accuracy) -> (f64, f64) {
    match *acc {
        Accuracy::Exact => (0.0, 0.0),
        Accuracy::Quadrature { tol } => (tol, 0.0),
        Accuracy::MonteCarlo { stderr, .. } => (0.0, stderr),
    }
}

// Evaluate every query on both models. Queries without a closed form are
// estimated from one generator sample per model drawn with the same
// (n, seed), so both sides share random numbers; when both sides are
// sampled the tolerance uses the stderr of the paired difference.
fn compare_queries(
    m1: &ModelSpec,
    m2: &ModelSpec,
    queries: &[Query],
    opts: &EvalOptions,
) -> Result<(Vec<Comparison>, bool)> {
    let c1: Vec<Option<EllValue>> = queries.iter().map(|q| closed_value(m1, q, opts)).collect::<Result<_>>()?;
    let c2: Vec<Option<EllValue>> = queries.iter().map(|q| closed_value(m2, q, opts)).collect::<Result<_>>()?;
    let need1: Vec<usize> = (0..queries.len()).filter(|&i| c1[i].is_none()).collect();
    let need2: Vec<usize> = (0..queries.len()).filter(|&i| c2[i].is_none()).collect();
    if (!need1.is_empty() || !need2.is_empty()) && opts.mc_n == 0 {
        return Err(Error::Domain("Monte Carlo sample size must be positive".into()));
    }
    let s1: Option<GeneratorSample> = if need1.is_empty() {
        None
    } else {
        Some(m1.sample(opts.mc_n, opts.seed)?)
    };
    let s2: Option<GeneratorSample> = if need2.is_empty() {
        None
    } else {
        Some(m2.sample(opts.mc_n, opts.seed)?)
    };
    // (mean, stderr) per sampled query and per side, and paired diff stderr.
    let mut mc1 = vec![(0.0, 0.0); queries.len()];
    let mut mc2 = vec![(0.0, 0.0); queries.len()];
    let mut paired = vec![None; queries.len()];
    match (&s1, &s2) {
        (Some(a), Some(b)) => {
            let both: Vec<usize> = need1.iter().copied().filter(|i| c2[*i].is_none()).collect();
            let (k1, k2) = (need1.len(), need2.len());
            let stats = a.paired_mean_of_many(b, k1 + k2 + both.len(), |r1, r2, out| {
                for (o, &q) in out[..k1].iter_mut().zip(&need1) {
                    *o = queries[q].eval_row(r1);
                }
                for (o, &q) in out[k1..k1 + k2].iter_mut().zip(&need2) {
                    *o = queries[q].eval_row(r2);
                }
                for (o, &q) in out[k1 + k2..].iter_mut().zip(&both) {
                    *o = queries[q].eval_row(r1) - queries[q].eval_row(r2);
                }
            });
            for (j, &q) in need1.iter().enumerate() {
                mc1[q] = (stats[j].mean(), stats[j].stderr());
            }
            for (j, &q) in need2.iter().enumerate() {
                mc2[q] = (stats[k1 + j].mean(), stats[k1 + j].stderr());
            }
            for (j, &q) in both.iter().enumerate() {
                paired[q] = Some(stats[k1 + k2 + j].stderr());
            }
        }
        (Some(a), None) => fill_single(a, queries, &need1, &mut mc1),
        (None, Some(b)) => fill_single(b, queries, &need2, &mut mc2),
        (None, None) => {}
    }
    let mut any_mc = s1.is_some() || s2.is_some();
    let mut out = Vec::with_capacity(queries.len());
    for (i, q) in queries.iter().enumerate() {
        let (l, quad1, se1) = match c1[i] {
            Some(v) => {
                let (qt, se) = split_tol(&v.accuracy);
                (v.value, qt, se)
            }
            None => (mc1[i].0, 0.0, mc1[i].1),
        };
        let (r, quad2, se2) = match c2[i] {
            Some(v) => {
                let (qt, se) = split_tol(&v.accuracy);
                (v.value, qt, se)
            }
            None => (mc2[i].0, 0.0, mc2[i].1),
        };
        if se1 > 0.0 || se2 > 0.0 {
            any_mc = true;
        }
        let se = paired[i].unwrap_or_else(|| (se1 * se1 + se2 * se2).sqrt());
        out.push(Comparison {
            point: q.point.clone(),
            subset: q.set,
            lhs: l,
            rhs: r,
            tol: EXACT_TOL + quad1 + quad2 + 3.0 * se,
        });
    }
    Ok((out, any_mc))
}

fn fill_single(s: &GeneratorSample, queries: &[Query], need: &[usize], dst: &mut [(f64, f64)]) {
    let stats = s.mean_of_many(need.len(), |row, out| {
        for (o, &q) in out.iter_mut().zip(need) {
            *o = queries[q].eval_row(row);
        }
    });
    for (j, &q) in need.iter().enumerate() {
        dst[q] = (stats[j].mean(), stats[j].stderr());
    }
}

fn lo_queries(grid: &SimplexGrid) -> Vec<Query> {
    grid.directions()
        .into_iter()
        .map(|w| Query {
            point: w,
            set: None,
            idx: Vec::new(),
        })
        .collect()
}

fn uo_queries(grid: &SimplexGrid) -> Vec<Query> {
    let sets: Vec<SubsetMask> = enumerate_subsets(grid.dim, true)
        .unwrap_or_default()
        .into_iter()
        .filter(|s| s.len() >= 2)
        .collect();
    let mut out = Vec::new();
    for a in grid.directions() {
        for &s in &sets {
            out.push(Query {
                point: a.clone(),
                set: Some(s),
                idx: s.indices().collect(),
            });
        }
    }
    out
}

fn grid_exactness(any_mc: bool) -> Exactness {
    if any_mc {
        Exactness::MonteCarlo
    } else {
        Exactness::GridCertificate
    }
}

fn use_tables(m1: &ModelSpec, m2: &ModelSpec) -> bool {
    m1.is_choquet_family() && m2.is_choquet_family()
}

/// Is `m1 ≤_lo m2`, i.e. `ℓ₁ ≤ ℓ₂`?
pub fn check_lo(m1: &ModelSpec, m2: &ModelSpec, grid: &SimplexGrid, opts: &EvalOptions) -> Result<OrderVerdict> {
    check_pair(m1, m2)?;
    let mut tally = Tally::new();
    if use_tables(m1, m2) {
        lo_tables(m1, m2, &mut tally);
        return Ok(tally.finish(Relation::Lo, table_exactness(m1, m2), None, opts, Vec::new()));
    }
    check_grid(m1, grid)?;
    let (cmp, any_mc) = compare_queries(m1, m2, &lo_queries(grid), opts)?;
    cmp.iter().for_each(|c| tally.add(Relation::Lo, c));
    Ok(tally.finish(Relation::Lo, grid_exactness(any_mc), Some(grid.into()), opts, Vec::new()))
}

/// Is `m1 ≤_uo m2`, i.e. `E min_{i∈A} a_iZ_i` smaller under `m1`?
pub fn check_uo(m1: &ModelSpec, m2: &ModelSpec, grid: &SimplexGrid, opts: &EvalOptions) -> Result<OrderVerdict> {
    check_pair(m1, m2)?;
    let mut tally = Tally::new();
    if use_tables(m1, m2) {
        uo_tables(m1, m2, &mut tally);
        return Ok(tally.finish(Relation::Uo, table_exactness(m1, m2), None, opts, Vec::new()));
    }
    check_grid(m1, grid)?;
    let (cmp, any_mc) = compare_queries(m1, m2, &uo_queries(grid), opts)?;
    cmp.iter().for_each(|c| tally.add(Relation::Uo, c));
    Ok(tally.finish(Relation::Uo, grid_exactness(any_mc), Some(grid.into()), opts, Vec::new()))
}

/// Is `m1 ≤_pqd m2`: `m1 ≤_uo m2` and `m2 ≤_lo m1`?
///
/// Evidence from both sub-checks is pooled: a violation of either refutes
/// `m1 ≤_pqd m2`, strict evidence from either refutes the reverse. For
/// `d = 2` the two sub-checks must agree; a disagreement is noted.
pub fn check_pqd(m1: &ModelSpec, m2: &ModelSpec, grid: &SimplexGrid, opts: &EvalOptions) -> Result<OrderVerdict> {
    check_pair(m1, m2)?;
    let uo = check_uo(m1, m2, grid, opts)?;
    let lo = check_lo(m2, m1, grid, opts)?;
    let mut notes = Vec::new();
    if m1.dim() == 2 {
        let agree = uo.outcome == lo.outcome
            || uo.outcome == Outcome::Inconclusive
            || lo.outcome == Outcome::Inconclusive;
        if !agree {
            notes.push(format!(
                "bivariate routes disagree: uo {} but reversed lo {}",
                uo.outcome.name(),
                lo.outcome.name()
            ));
        }
    }
    let exactness = match (uo.exactness, lo.exactness) {
        (Exactness::MonteCarlo, _) | (_, Exactness::MonteCarlo) => Exactness::MonteCarlo,
        (Exactness::GridCertificate, _) | (_, Exactness::GridCertificate) => Exactness::GridCertificate,
        _ => Exactness::Exact,
    };
    let mut tally = Tally::new();
    for v in [&uo, &lo] {
        tally.comparisons += v.comparisons;
        tally.violations += v.violations;
        tally.reverse += v.reverse;
        tally.worst_violation = tally.worst_violation.max(v.worst_violation);
        tally.worst_reverse = tally.worst_reverse.max(v.worst_reverse);
        for w in &v.witnesses {
            let margin = match w.kind {
                WitnessKind::Violation => w.lhs - w.rhs - w.tolerance,
                WitnessKind::Reverse => w.rhs - w.lhs - w.tolerance,
            };
            let kept = match w.kind {
                WitnessKind::Violation => &mut tally.kept_violation,
                WitnessKind::Reverse => &mut tally.kept_reverse,
            };
            keep_worst(kept, w.clone(), margin);
        }
    }
    let grid = uo.grid.clone().or(lo.grid.clone());
    Ok(tally.finish(Relation::Pqd, exactness, grid, opts, notes))
}

/// Dispatch on [`Relation`].
pub fn check(
    relation: Relation,
    m1: &ModelSpec,
    m2: &ModelSpec,
    grid: &SimplexGrid,
    opts: &EvalOptions,
) -> Result<OrderVerdict> {
    match relation {
        Relation::Lo => check_lo(m1, m2, grid, opts),
        Relation::Uo => check_uo(m1, m2, grid, opts),
        Relation::Pqd => check_pqd(m1, m2, grid, opts),
    }
}

// ---------- Bernstein transforms of extremal coefficients ----------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BernsteinId {
    /// `1 − e^{−x}`
    OneMinusExp,
    /// `x`
    Identity,
    /// `log(1 + x)`
    Log1p,
    /// `√(1 + x) − 1`
    SqrtShift,
}

impl BernsteinId {
    pub const ALL: [BernsteinId; 4] = [
        BernsteinId::OneMinusExp,
        BernsteinId::Identity,
        BernsteinId::Log1p,
        BernsteinId::SqrtShift,
    ];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            BernsteinId::OneMinusExp => -(-x).exp_m1(),
            BernsteinId::Identity => x,
            BernsteinId::Log1p => x.ln_1p(),
            BernsteinId::SqrtShift => (1.0 + x).sqrt() - 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub g: BernsteinId,
    pub holds: bool,
    /// Largest `lhs(A) − rhs(A)` over nonempty `A`; ≤ 1e-10 when it holds.
    pub worst_margin: f64,
    pub worst_subset: String,
}

/// For `χ₁ ≤ χ₂`, check `Σ_{∅≠I⊂A} (−1)^{|I|+1} g(θ₁(I)) ≤` the same sum
/// for `θ₂`, for every nonempty `A`.
pub fn prop_b7_oracle(theta1: &CoefficientTable, theta2: &CoefficientTable, g: BernsteinId) -> Result<BernsteinReport> {
    for t in [theta1, theta2] {
        if t.kind() != TableKind::Theta {
            return Err(Error::Domain(format!("expected a theta table, got {}", t.kind().name())));
        }
    }
    if theta1.dim() != theta2.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta1.dim(),
            got: theta2.dim(),
        });
    }
    for (i, t) in [theta1, theta2].into_iter().enumerate() {
        for (a, m) in t.convert(TableKind::Tau).iter() {
            if m < -1e-12 {
                return Err(Error::NegativeMass {
                    subset: format!("table {} {}", i + 1, a.to_key()),
                    mass: m,
                });
            }
        }
    }
    let (c1, c2) = (theta1.convert(TableKind::Chi), theta2.convert(TableKind::Chi));
    for (a, v) in c1.iter() {
        if v > c2.get(a) + 1e-12 {
            return Err(Error::Domain(format!(
                "precondition chi1 <= chi2 fails at {}: {} > {}",
                a.to_key(),
                v,
                c2.get(a)
            )));
        }
    }
    let g1 = CoefficientTable::from_fn(TableKind::Theta, theta1.dim(), |a| g.eval(theta1.get(a)))?;
    let g2 = CoefficientTable::from_fn(TableKind::Theta, theta2.dim(), |a| g.eval(theta2.get(a)))?;
    // The alternating sums are exactly the θ→χ transform of g∘θ.
    let (s1, s2) = (g1.convert(TableKind::Chi), g2.convert(TableKind::Chi));
    let mut worst = f64::NEG_INFINITY;
    let mut worst_subset = String::new();
    for (a, v) in s1.iter() {
        let m = v - s2.get(a);
        if m > worst {
            worst = m;
            worst_subset = a.to_key();
        }
    }
    Ok(BernsteinReport {
        g,
        holds: worst <= 1e-10,
        worst_margin: worst,
        worst_subset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::tests::exchangeable;
    use crate::grid::simplex_grid;
    use crate::subset::{signed_subset_sum, SignRule};

    fn choquet(row: char) -> ModelSpec {
        ModelSpec::choquet(&exchangeable(row)).unwrap()
    }

    fn g3() -> SimplexGrid {
        simplex_grid(3, 6).unwrap()
    }

    #[test]
    fn exchangeable_verdicts() {
        let o = EvalOptions::default();
        let (a, b, c, d) = (choquet('A'), choquet('B'), choquet('C'), choquet('D'));
        assert_eq!(check_uo(&b, &d, &g3(), &o).unwrap().outcome, Outcome::Holds);
        assert_eq!(check_lo(&b, &d, &g3(), &o).unwrap().outcome, Outcome::Incomparable);
        assert_eq!(check_lo(&b, &c, &g3(), &o).unwrap().outcome, Outcome::Holds);
        assert_eq!(check_lo(&c, &b, &g3(), &o).unwrap().outcome, Outcome::HoldsReversed);
        assert_eq!(check_uo(&b, &c, &g3(), &o).unwrap().outcome, Outcome::Incomparable);
        assert_eq!(check_pqd(&a, &b, &g3(), &o).unwrap().outcome, Outcome::Holds);
        assert_eq!(check_uo(&a, &c, &g3(), &o).unwrap().outcome, Outcome::Holds);
        assert_eq!(check_lo(&a, &c, &g3(), &o).unwrap().outcome, Outcome::Holds);
        let v = check_lo(&b, &d, &g3(), &o).unwrap();
        assert_eq!(v.exactness, Exactness::Exact);
        assert!(v.witnesses_of(WitnessKind::Violation).count() >= 1);
        assert!(v.witnesses_of(WitnessKind::Reverse).count() >= 1);
    }

    #[test]
    fn bounds_hold_for_every_family() {
        let o = EvalOptions {
            mc_n: 20_000,
            ..EvalOptions::default()
        };
        let g2 = simplex_grid(2, 16).unwrap();
        let ind = ModelSpec::independent(2).unwrap();
        let dep = ModelSpec::fully_dependent(2).unwrap();
        let models = [
            ModelSpec::dirichlet(vec![0.5, 2.0]).unwrap(),
            ModelSpec::husler_reiss(vec![vec![0.0, 1.5], vec![1.5, 0.0]]).unwrap(),
            choquet('A').marginalize(SubsetMask::from_indices(&[0, 1], 3).unwrap()).unwrap(),
        ];
        for m in &models {
            assert!(check_lo(&dep, m, &g2, &o).unwrap().holds());
            assert!(check_uo(m, &dep, &g2, &o).unwrap().holds());
            assert!(check_pqd(&ind, m, &g2, &o).unwrap().holds());
            assert!(check_pqd(m, &dep, &g2, &o).unwrap().holds());
        }
    }

    #[test]
    fn bivariate_grid_routes_agree() {
        let o = EvalOptions::default();
        let g = simplex_grid(2, 32).unwrap();
        let a = ModelSpec::dirichlet(vec![0.5, 1.0]).unwrap();
        let b = ModelSpec::dirichlet(vec![2.0, 3.0]).unwrap();
        let v = check_pqd(&a, &b, &g, &o).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert_eq!(v.exactness, Exactness::GridCertificate);
        assert!(v.notes.is_empty());
        assert_eq!(check_pqd(&b, &a, &g, &o).unwrap().outcome, Outcome::HoldsReversed);
        assert_eq!(check_uo(&a, &b, &g, &o).unwrap().outcome, Outcome::Holds);
        assert_eq!(check_lo(&b, &a, &g, &o).unwrap().outcome, Outcome::Holds);
    }

    #[test]
    fn non_nested_dirichlet_pair_is_incomparable() {
        let o = EvalOptions::default();
        let g = simplex_grid(2, 64).unwrap();
        let a = ModelSpec::dirichlet(vec![0.15, 12.0]).unwrap();
        let b = ModelSpec::dirichlet(vec![4.0, 0.2]).unwrap();
        assert_eq!(check_lo(&a, &b, &g, &o).unwrap().outcome, Outcome::Incomparable);
    }

    #[test]
    fn identical_models_under_monte_carlo_are_inconclusive() {
        let o = EvalOptions {
            mc_n: 10_000,
            ..EvalOptions::default()
        };
        let m = ModelSpec::dirichlet(vec![1.0, 2.0, 3.0]).unwrap();
        let v = check_lo(&m, &m, &simplex_grid(3, 4).unwrap(), &o).unwrap();
        assert_eq!(v.outcome, Outcome::Inconclusive);
        assert_eq!(v.exactness, Exactness::MonteCarlo);
        let e = ModelSpec::independent(3).unwrap();
        assert_eq!(check_lo(&e, &e, &g3(), &o).unwrap().outcome, Outcome::Holds);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let o = EvalOptions::default();
        let a = ModelSpec::independent(2).unwrap();
        let b = ModelSpec::independent(3).unwrap();
        assert!(check_lo(&a, &b, &g3(), &o).is_err());
        let h = ModelSpec::husler_reiss(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(check_lo(&h, &h, &g3(), &o).is_err());
    }

    #[test]
    fn witnesses_are_capped() {
        let o = EvalOptions::default();
        let a = ModelSpec::independent(6).unwrap();
        let b = ModelSpec::fully_dependent(6).unwrap();
        let v = check_lo(&a, &b, &simplex_grid(6, 2).unwrap(), &o).unwrap();
        assert_eq!(v.outcome, Outcome::HoldsReversed);
        assert_eq!(v.violations, 57);
        assert_eq!(v.witnesses.len(), MAX_WITNESSES);
    }

    #[test]
    fn bernstein_sums_match_direct_evaluation() {
        let (b, d) = (exchangeable('B').convert(TableKind::Theta), exchangeable('D').convert(TableKind::Theta));
        let r = prop_b7_oracle(&b, &d, BernsteinId::OneMinusExp).unwrap();
        assert!(r.holds);
        let full = SubsetMask::full(3).unwrap();
        let g = BernsteinId::OneMinusExp;
        let direct = |t: &CoefficientTable| {
            signed_subset_sum(|i| Some(g.eval(t.get(i))), full, SignRule::InclusionExclusion).unwrap()
        };
        assert!(direct(&b) <= direct(&d));
        let same = prop_b7_oracle(&b, &b, BernsteinId::Log1p).unwrap();
        assert_eq!(same.worst_margin, 0.0);
        assert!(prop_b7_oracle(&d, &b, BernsteinId::Identity).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Outcome::Holds.exit_code(), 0);
        assert_eq!(Outcome::HoldsReversed.exit_code(), 1);
        assert_eq!(Outcome::Incomparable.exit_code(), 1);
        assert_eq!(Outcome::Inconclusive.exit_code(), 4);
        assert_eq!(Relation::parse("PQD").unwrap(), Relation::Pqd);
    }
}
