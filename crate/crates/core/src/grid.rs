//! Positive directions and lattice grids on the unit simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::check_dim;

/// Default cap on the number of grid points.
pub const DEFAULT_GRID_LIMIT: usize = 1 << 22;

/// A vector of strictly positive, finite weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::param("a", None, "direction must be nonempty"));
        }
        for (i, &v) in a.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    "a",
                    Some(i),
                    format!("direction entries must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(Direction(a))
    }

    pub fn ones(d: usize) -> Self {
        Direction(vec![1.0; d])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Points `k/m` with `k ∈ ℕ₀^d`, `Σk = m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexGrid {
    pub dim: usize,
    pub m: usize,
    pub points: Vec<Vec<f64>>,
}

/// Edge density used when the caller does not pick one.
pub fn default_density(d: usize) -> usize {
    match d {
        0..=2 => 64,
        3 => 16,
        _ => 8,
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of lattice points for `(d, m)`: `C(m+d−1, d−1)`.
pub fn grid_size(d: usize, m: usize) -> u128 {
    binomial((m + d - 1) as u128, (d - 1) as u128)
}

pub fn simplex_grid(d: usize, m: usize) -> Result<SimplexGrid> {
    simplex_grid_with_limit(d, m, DEFAULT_GRID_LIMIT)
}

pub fn simplex_grid_with_limit(d: usize, m: usize, limit: usize) -> Result<SimplexGrid> {
    check_dim(d, 2)?;
    if m < 2 {
        return Err(Error::param("m", None, "grid density must be at least 2"));
    }
    let count = grid_size(d, m);
    if count > limit as u128 {
        return Err(Error::GridTooLarge {
            points: count,
            limit,
        });
    }
    let mut points = Vec::with_capacity(count as usize);
    let mut k = vec![0usize; d];
    compositions(&mut k, 0, m, m, &mut points);
    Ok(SimplexGrid { dim: d, m, points })
}

// Compositions of `remaining` into k[pos..], first coordinate descending.
fn compositions(k: &mut [usize], pos: usize, remaining: usize, m: usize, out: &mut Vec<Vec<f64>>) {
    let d = k.len();
    if pos + 1 == d {
        k[pos] = remaining;
        out.push(k.iter().map(|&v| v as f64 / m as f64).collect());
        return;
    }
    for v in (0..=remaining).rev() {
        k[pos] = v;
        compositions(k, pos + 1, remaining - v, m, out);
    }
}

impl SimplexGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The lattice contains the barycenter only when `d` divides `m`; this
    /// appends it otherwise.
    pub fn with_barycenter(mut self) -> Self {
        let c = 1.0 / self.dim as f64;
        let has = self
            .points
            .iter()
            .any(|p| p.iter().all(|&v| (v - c).abs() < 1e-12));
        if !has {
            self.points.push(vec![c; self.dim]);
        }
        self
    }

    /// Lower clip applied by [`SimplexGrid::directions`].
    pub fn clip(&self) -> f64 {
        1.0 / (4.0 * self.m as f64)
    }

    /// Strictly positive directions: each point clipped below at `1/(4m)`
    /// and renormalized onto the simplex.
    pub fn directions(&self) -> Vec<Vec<f64>> {
        let c = self.clip();
        self.points
            .iter()
            .map(|p| {
                let q: Vec<f64> = p.iter().map(|&v| v.max(c)).collect();
                let s: f64 = q.iter().sum();
                q.into_iter().map(|v| v / s).collect()
            })
            .collect()
    }
}

/// Check that `w` lies on the unit simplex within `tol`.
pub fn check_simplex_point(w: &[f64], tol: f64) -> Result<()> {
    let mut sum = 0.0;
    for (i, &v) in w.iter().enumerate() {
        if !v.is_finite() || v < -tol {
            return Err(Error::param("w", Some(i), format!("not a simplex coordinate: {v}")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::Domain(format!(
            "point is off the unit simplex: coordinates sum to {sum}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bivariate_m2() {
        let g = simplex_grid(2, 2).unwrap();
        assert_eq!(g.points, vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]);
    }

    #[test]
    fn counts_match_binomial() {
        assert_eq!(simplex_grid(3, 2).unwrap().len(), 6);
        let g = simplex_grid(2, 4).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.points.contains(&vec![0.25, 0.75]));
        for d in 2..=5 {
            for m in 2..=9 {
                assert_eq!(simplex_grid(d, m).unwrap().len() as u128, grid_size(d, m));
            }
        }
    }

    #[test]
    fn points_sum_to_one_and_include_vertices() {
        let g = simplex_grid(4, 6).unwrap();
        for p in &g.points {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
        for i in 0..4 {
            let mut e = vec![0.0; 4];
            e[i] = 1.0;
            assert!(g.points.contains(&e));
        }
    }

    #[test]
    fn barycenter_helper() {
        let g = simplex_grid(3, 4).unwrap().with_barycenter();
        assert_eq!(g.len(), 16);
        let g = simplex_grid(3, 6).unwrap().with_barycenter();
        assert_eq!(g.len(), 28);
    }

    #[test]
    fn directions_are_positive() {
        let g = simplex_grid(3, 8).unwrap();
        for a in g.directions() {
            assert!(a.iter().all(|&v| v > 0.0));
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejections() {
        assert!(simplex_grid(1, 4).is_err());
        assert!(simplex_grid(3, 1).is_err());
        assert!(matches!(
            simplex_grid_with_limit(10, 100, 1000),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(Direction::new(vec![1.0, 0.0]).is_err());
        assert!(Direction::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(check_simplex_point(&[0.5, 0.6], 1e-9).is_err());
    }
}
