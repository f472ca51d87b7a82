use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};
use rayon::prelude::*;

use super::estimators::GeneratorSample;
use super::rng::{stream, CHUNK, TAG_ATOM, TAG_DIRICHLET, TAG_FRECHET, TAG_GAMMA, TAG_NORMAL};
use crate::coeffs::{CoefficientTable, TableKind};
use crate::error::{Error, Result};
use crate::models::{DirichletParams, ModelSpec};
use crate::variogram::VariogramMatrix;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    Ok(())
}

// Fill an n×d buffer chunk by chunk; `fill(chunk_index, rows, buf)`.
fn build<F>(family: &'static str, d: usize, n: usize, seed: u64, fill: F) -> GeneratorSample
where
    F: Fn(u64, usize, &mut [f64]) + Sync,
{
    let mut data = vec![0.0; n * d];
    data.par_chunks_mut(CHUNK * d)
        .enumerate()
        .for_each(|(c, buf)| fill(c as u64, buf.len() / d, buf));
    GeneratorSample {
        family,
        dim: d,
        n,
        seed,
        data,
    }
}

fn gamma_dist(shape: f64) -> Gamma<f64> {
    Gamma::new(shape, 1.0).expect("shape validated positive")
}

/// Gamma generator: rows `(Γ₁/α₁, …, Γ_d/α_d)`, `Γ_i ~ Γ(α_i)` independent.
/// Component `i` always reads the same streams, so Dirichlet models that
/// share an `α_i` share that column.
pub fn sample_gamma_generator(alpha: &DirichletParams, n: usize, seed: u64) -> Result<GeneratorSample> {
    check_n(n)?;
    let a = alpha.alpha().to_vec();
    let d = a.len();
    let dists: Vec<Gamma<f64>> = a.iter().map(|&s| gamma_dist(s)).collect();
    Ok(build("gamma", d, n, seed, |c, rows, buf| {
        for i in 0..d {
            let mut rng = stream(seed, &[TAG_GAMMA, i as u64, c]);
            for r in 0..rows {
                buf[r * d + i] = dists[i].sample(&mut rng) / a[i];
            }
        }
    }))
}

/// Dirichlet generator: rows `‖α‖₁·(D₁/α₁, …, D_d/α_d)` with `D ~ Dir(α)`
/// built from normalized Gammas (drawn from separate streams).
pub fn sample_dirichlet_generator(alpha: &DirichletParams, n: usize, seed: u64) -> Result<GeneratorSample> {
    check_n(n)?;
    let a = alpha.alpha().to_vec();
    let d = a.len();
    let total: f64 = a.iter().sum();
    let dists: Vec<Gamma<f64>> = a.iter().map(|&s| gamma_dist(s)).collect();
    Ok(build("dirichlet", d, n, seed, |c, rows, buf| {
        for i in 0..d {
            let mut rng = stream(seed, &[TAG_DIRICHLET, i as u64, c]);
            for r in 0..rows {
                buf[r * d + i] = dists[i].sample(&mut rng);
            }
        }
        for row in buf.chunks_exact_mut(d) {
            let s: f64 = row.iter().sum();
            for (v, &ai) in row.iter_mut().zip(&a) {
                *v = total * (*v / s) / ai;
            }
        }
    }))
}

/// Dirichlet draws `D ~ Dir(α)` on the simplex (rows sum to 1).
pub fn sample_dirichlet_simplex(alpha: &DirichletParams, n: usize, seed: u64) -> Result<GeneratorSample> {
    let mut s = sample_dirichlet_generator(alpha, n, seed)?;
    let a = alpha.alpha().to_vec();
    let total: f64 = a.iter().sum();
    for row in s.data.chunks_exact_mut(a.len()) {
        for (v, &ai) in row.iter_mut().zip(&a) {
            *v = *v * ai / total;
        }
    }
    s.family = "dirichlet-simplex";
    Ok(s)
}

/// Log-Gaussian generator `Z_j = exp(W_j − Var(W_j)/2)` with
/// `W ~ N(0, Σ_anchor)`. Standard normals are read per component from
/// shared streams, so models with different `γ` use common random numbers.
pub fn sample_hr_generator(gamma: &VariogramMatrix, anchor: usize, n: usize, seed: u64) -> Result<GeneratorSample> {
    check_n(n)?;
    let d = gamma.dim();
    let root = gamma.anchored_factor(anchor)?;
    let sigma = gamma.anchored_covariance(anchor)?;
    let half_var: Vec<f64> = (0..d).map(|j| 0.5 * sigma[(j, j)]).collect();
    let s: Vec<f64> = (0..d).flat_map(|j| (0..d).map(move |k| (j, k))).map(|(j, k)| root[(j, k)]).collect();
    Ok(build("husler_reiss", d, n, seed, |c, rows, buf| {
        let mut z = vec![0.0; rows * d];
        for k in 0..d {
            let mut rng = stream(seed, &[TAG_NORMAL, k as u64, c]);
            for r in 0..rows {
                z[r * d + k] = StandardNormal.sample(&mut rng);
            }
        }
        for r in 0..rows {
            let zr = &z[r * d..(r + 1) * d];
            for j in 0..d {
                let w: f64 = s[j * d..(j + 1) * d].iter().zip(zr).map(|(a, b)| a * b).sum();
                buf[r * d + j] = (w - half_var[j]).exp();
            }
        }
    }))
}

/// Generator of a Choquet model: atom `K` with probability `τ(K)/T`, then
/// `Z = T·e_K` where `T = Σ τ`.
pub fn sample_choquet_generator(tau: &CoefficientTable, n: usize, seed: u64) -> Result<GeneratorSample> {
    check_n(n)?;
    if tau.kind() != TableKind::Tau {
        return Err(Error::Domain("Choquet generator needs a tau table".into()));
    }
    let d = tau.dim();
    let atoms: Vec<(u32, f64)> = tau
        .iter()
        .filter(|&(_, m)| m > 0.0)
        .map(|(a, m)| (a.bits(), m))
        .collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let mut cum = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for &(_, m) in &atoms {
        acc += m / total;
        cum.push(acc);
    }
    Ok(build("choquet", d, n, seed, |c, rows, buf| {
        let mut rng = stream(seed, &[TAG_ATOM, 0, c]);
        for r in 0..rows {
            let u: f64 = rng.random();
            let k = cum.partition_point(|&p| p <= u).min(atoms.len() - 1);
            let bits = atoms[k].0;
            for j in 0..d {
                buf[r * d + j] = if bits & (1 << j) != 0 { total } else { 0.0 };
            }
        }
    }))
}

/// Draw a model's generator.
pub fn sample_generator(model: &ModelSpec, n: usize, seed: u64) -> Result<GeneratorSample> {
    check_n(n)?;
    match model {
        ModelSpec::Dirichlet(p) => sample_gamma_generator(p, n, seed),
        ModelSpec::HuslerReiss(g) => sample_hr_generator(g, 0, n, seed),
        ModelSpec::Choquet(c) => sample_choquet_generator(c.tau(), n, seed),
        ModelSpec::FullyDependent { dim } => Ok(build("dependent", *dim, n, seed, |_, _, buf| {
            buf.fill(1.0);
        })),
        ModelSpec::Independent { dim } => {
            let d = *dim;
            Ok(build("independent", d, n, seed, |c, rows, buf| {
                let mut rng = stream(seed, &[TAG_ATOM, 1, c]);
                for r in 0..rows {
                    let j = rng.random_range(0..d);
                    buf[r * d + j] = d as f64;
                }
            }))
        }
    }
}

/// Exact draws of the Choquet max-stable vector:
/// `X_j = max_{A∋j} τ(A)·F_A` with independent unit Fréchet `F_A`.
pub fn sample_choquet_maxstable(tau: &CoefficientTable, n: usize, seed: u64) -> Result<GeneratorSample> {
    check_n(n)?;
    if tau.kind() != TableKind::Tau {
        return Err(Error::Domain("Choquet sampler needs a tau table".into()));
    }
    let d = tau.dim();
    let atoms: Vec<(u32, f64)> = tau
        .iter()
        .filter(|&(_, m)| m > 0.0)
        .map(|(a, m)| (a.bits(), m))
        .collect();
    Ok(build("choquet-maxstable", d, n, seed, |c, rows, buf| {
        for &(bits, m) in &atoms {
            let mut rng = stream(seed, &[TAG_FRECHET, bits as u64, c]);
            for r in 0..rows {
                let u: f64 = Open01.sample(&mut rng);
                let f = -1.0 / u.ln();
                let v = m * f;
                for j in 0..d {
                    if bits & (1 << j) != 0 {
                        let slot = &mut buf[r * d + j];
                        if v > *slot {
                            *slot = v;
                        }
                    }
                }
            }
        }
    }))
}
