//! Subsets of the ground set `{1, …, d}` as bitmasks, and the signed
//! subset-sum kernels (inclusion–exclusion, Möbius inversion, zeta
//! transforms) that the coefficient algebra is built from.
//!
//! Components are 0-based internally; `Display` and the JSON key format use
//! the 1-based indices customary in the literature.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported ground-set size.
pub const MAX_DIM: usize = 20;

/// A subset of `{1, …, dim}` stored as a bitmask (bit `i` ↔ component `i+1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    bits: u32,
    dim: u8,
}

pub(crate) fn check_dim(dim: usize, min: usize) -> Result<()> {
    if dim < min || dim > MAX_DIM {
        return Err(Error::DimensionOutOfRange {
            dim,
            min,
            max: MAX_DIM,
        });
    }
    Ok(())
}

impl SubsetMask {
    pub fn new(bits: u32, dim: usize) -> Result<Self> {
        check_dim(dim, 1)?;
        if (bits as u64) >= (1u64 << dim) {
            return Err(Error::SubsetOutOfRange {
                bits: bits as u64,
                dim,
            });
        }
        Ok(SubsetMask {
            bits,
            dim: dim as u8,
        })
    }

    /// Like [`SubsetMask::new`] but rejects the empty set.
    pub fn nonempty(bits: u32, dim: usize) -> Result<Self> {
        let s = Self::new(bits, dim)?;
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        Ok(s)
    }

    pub(crate) fn from_raw(bits: u32, dim: usize) -> Self {
        debug_assert!(dim <= MAX_DIM && (bits as u64) < (1u64 << dim));
        SubsetMask {
            bits,
            dim: dim as u8,
        }
    }

    pub fn full(dim: usize) -> Result<Self> {
        check_dim(dim, 1)?;
        Ok(Self::from_raw(((1u64 << dim) - 1) as u32, dim))
    }

    pub fn singleton(i: usize, dim: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::Domain(format!(
                "component {i} out of range for dimension {dim}"
            )));
        }
        Self::new(1 << i, dim)
    }

    /// Build from 0-based component indices.
    pub fn from_indices(indices: &[usize], dim: usize) -> Result<Self> {
        check_dim(dim, 1)?;
        let mut bits = 0u32;
        for &i in indices {
            if i >= dim {
                return Err(Error::Domain(format!(
                    "component {} out of range for dimension {dim}",
                    i + 1
                )));
            }
            bits |= 1 << i;
        }
        Ok(Self::from_raw(bits, dim))
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn dim(self) -> usize {
        self.dim as usize
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < self.dim() && self.bits & (1 << i) != 0
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn union(self, other: SubsetMask) -> SubsetMask {
        Self::from_raw(self.bits | other.bits, self.dim())
    }

    pub fn intersection(self, other: SubsetMask) -> SubsetMask {
        Self::from_raw(self.bits & other.bits, self.dim())
    }

    pub fn complement(self) -> SubsetMask {
        let full = ((1u64 << self.dim) - 1) as u32;
        Self::from_raw(full & !self.bits, self.dim())
    }

    /// 0-based component indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.dim()).filter(move |&i| bits & (1 << i) != 0)
    }

    /// All subsets of `self` (including `∅` and `self`), increasing bits.
    pub fn subsets(self) -> impl Iterator<Item = SubsetMask> {
        let dim = self.dim();
        let a = self.bits;
        // Enumerate submasks of `a` in increasing order via the
        // "increment within mask" trick.
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == a {
                None
            } else {
                Some(((cur | !a).wrapping_add(1)) & a)
            };
            Some(SubsetMask::from_raw(cur, dim))
        })
    }

    /// Re-index a subset `b ⊂ self` into the ground set `{1, …, |self|}`.
    pub fn compress(self, b: SubsetMask) -> SubsetMask {
        debug_assert!(b.is_subset_of(self));
        let mut out = 0u32;
        for (k, i) in self.indices().enumerate() {
            if b.contains(i) {
                out |= 1 << k;
            }
        }
        Self::from_raw(out, self.len())
    }

    /// Inverse of [`SubsetMask::compress`].
    pub fn expand(self, b: SubsetMask) -> SubsetMask {
        let mut out = 0u32;
        for (k, i) in self.indices().enumerate() {
            if b.bits & (1 << k) != 0 {
                out |= 1 << i;
            }
        }
        Self::from_raw(out, self.dim())
    }

    /// The indicator vector `e_A`.
    pub fn indicator(self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| if self.contains(i) { 1.0 } else { 0.0 })
            .collect()
    }

    /// Sorted 1-based index list, the JSON key format (`"[1,3]"`).
    pub fn to_key(self) -> String {
        let parts: Vec<String> = self.indices().map(|i| (i + 1).to_string()).collect();
        format!("[{}]", parts.join(","))
    }

    /// Parse a sorted, 1-based index list such as `"[1,3]"`, `"1,3"`,
    /// `"{1, 3}"` or `"1 3"`. Indices must be strictly increasing.
    pub fn parse_key(key: &str, dim: usize) -> Result<Self> {
        check_dim(dim, 1)?;
        let trimmed = key.trim();
        let inner = trimmed
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .or_else(|| trimmed.strip_prefix('{').and_then(|s| s.strip_suffix('}')))
            .unwrap_or(trimmed);
        let mut bits = 0u32;
        let mut last = 0usize;
        for tok in inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let idx: usize = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad subset index {tok:?} in key {key:?}")))?;
            if idx == 0 || idx > dim {
                return Err(Error::Parse(format!(
                    "subset index {idx} out of range 1..={dim} in key {key:?}"
                )));
            }
            if idx <= last {
                return Err(Error::Parse(format!(
                    "subset key {key:?} is not a strictly increasing index list"
                )));
            }
            last = idx;
            bits |= 1 << (idx - 1);
        }
        Ok(Self::from_raw(bits, dim))
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// All subsets of `{1, …, d}` in increasing-bits order.
pub fn enumerate_subsets(d: usize, nonempty_only: bool) -> Result<Vec<SubsetMask>> {
    check_dim(d, 1)?;
    let start = u32::from(nonempty_only);
    let end = (1u64 << d) as u32;
    Ok((start..end).map(|b| SubsetMask::from_raw(b, d)).collect())
}

/// Sign convention for [`signed_subset_sum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignRule {
    /// `Σ_{I⊂A} (−1)^{|A∖I|} f(I)` with `f(∅) := 0`.
    Moebius,
    /// `Σ_{∅≠I⊂A} (−1)^{|I|+1} f(I)`.
    InclusionExclusion,
}

/// Signed sum of `f` over the subsets of `a`. `f` returns `None` for
/// entries it does not define; those are reported as missing.
pub fn signed_subset_sum<F>(f: F, a: SubsetMask, rule: SignRule) -> Result<f64>
where
    F: Fn(SubsetMask) -> Option<f64>,
{
    let mut acc = 0.0;
    for i in a.subsets().filter(|s| !s.is_empty()) {
        let v = f(i).ok_or_else(|| Error::MissingEntry(i.to_string()))?;
        let odd = match rule {
            SignRule::InclusionExclusion => i.len() % 2 == 1,
            SignRule::Moebius => (a.len() - i.len()) % 2 == 0,
        };
        if odd {
            acc += v;
        } else {
            acc -= v;
        }
    }
    Ok(acc)
}

// Dense transforms over arrays of length 2^d indexed by bitmask. Each runs
// the standard O(d·2^d) dynamic program.

/// `g(A) = Σ_{I⊂A} f(I)`.
pub(crate) fn zeta_subset(values: &mut [f64]) {
    let n = values.len();
    let mut bit = 1;
    while bit < n {
        for mask in 0..n {
            if mask & bit != 0 {
                values[mask] += values[mask ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// `g(A) = Σ_{K⊃A} f(K)`.
pub(crate) fn zeta_superset(values: &mut [f64]) {
    let n = values.len();
    let mut bit = 1;
    while bit < n {
        for mask in 0..n {
            if mask & bit == 0 {
                values[mask] += values[mask | bit];
            }
        }
        bit <<= 1;
    }
}

/// `g(A) = Σ_{K⊃A} (−1)^{|K∖A|} f(K)`; inverse of [`zeta_superset`].
pub(crate) fn mobius_superset(values: &mut [f64]) {
    let n = values.len();
    let mut bit = 1;
    while bit < n {
        for mask in 0..n {
            if mask & bit == 0 {
                values[mask] -= values[mask | bit];
            }
        }
        bit <<= 1;
    }
}

/// `(−1)^{|A|+1}` as a float.
pub(crate) fn parity_sign(bits: usize) -> f64 {
    if bits.count_ones() % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(idx: &[usize], d: usize) -> SubsetMask {
        SubsetMask::from_indices(idx, d).unwrap()
    }

    #[test]
    fn enumerate_small_dims() {
        let s = enumerate_subsets(2, true).unwrap();
        assert_eq!(s, vec![mask(&[0], 2), mask(&[1], 2), mask(&[0, 1], 2)]);
        assert_eq!(enumerate_subsets(1, true).unwrap(), vec![mask(&[0], 1)]);
        assert_eq!(enumerate_subsets(3, false).unwrap().len(), 8);
        assert!(enumerate_subsets(0, true).is_err());
        assert!(enumerate_subsets(21, true).is_err());
    }

    #[test]
    fn enumeration_is_bijection_onto_integers() {
        for d in 1..=8 {
            let s = enumerate_subsets(d, true).unwrap();
            let bits: Vec<u32> = s.iter().map(|m| m.bits()).collect();
            let expect: Vec<u32> = (1..(1u32 << d)).collect();
            assert_eq!(bits, expect);
        }
    }

    #[test]
    fn submask_iteration_covers_all_subsets() {
        let a = mask(&[0, 2, 3], 5);
        let subs: Vec<u32> = a.subsets().map(|s| s.bits()).collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        assert!(subs.iter().all(|&b| b & !a.bits() == 0));
    }

    #[test]
    fn inclusion_exclusion_on_ones() {
        let f = |s: SubsetMask| if s.len() <= 2 { Some(1.0) } else { None };
        let v = signed_subset_sum(f, mask(&[0, 1], 2), SignRule::InclusionExclusion).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn inclusion_exclusion_exchangeable_model_a_pair() {
        // theta of the exchangeable trivariate model A restricted to {1,2}
        let theta = |s: SubsetMask| match s.len() {
            1 => Some(1.0),
            2 => Some(1.5),
            _ => None,
        };
        let chi = signed_subset_sum(theta, mask(&[0, 1], 2), SignRule::InclusionExclusion).unwrap();
        assert!((chi - 0.5).abs() < 1e-15);
    }

    #[test]
    fn missing_entry_is_reported() {
        let f = |s: SubsetMask| if s.len() == 1 { Some(1.0) } else { None };
        let err = signed_subset_sum(f, mask(&[0, 1], 2), SignRule::Moebius).unwrap_err();
        assert!(matches!(err, Error::MissingEntry(_)));
    }

    #[test]
    fn moebius_sign_convention() {
        // f ≡ 1: Σ_{I⊂A, I≠∅} (−1)^{|A∖I|} = −(−1)^{|A|}·1 = (−1)^{|A|+1}
        let f = |_s: SubsetMask| Some(1.0);
        let a = mask(&[0, 1, 2], 3);
        assert_eq!(signed_subset_sum(f, a, SignRule::Moebius).unwrap(), 1.0);
        let a = mask(&[0, 1], 3);
        assert_eq!(signed_subset_sum(f, a, SignRule::Moebius).unwrap(), -1.0);
    }

    #[test]
    fn inclusion_exclusion_is_an_involution() {
        let d = 5;
        let n = 1usize << d;
        let table: Vec<f64> = (0..n).map(|b| if b == 0 { 0.0 } else { (b as f64).sin() }).collect();
        let once: Vec<f64> = (0..n)
            .map(|b| {
                if b == 0 {
                    0.0
                } else {
                    signed_subset_sum(
                        |s| Some(table[s.bits() as usize]),
                        SubsetMask::from_raw(b as u32, d),
                        SignRule::InclusionExclusion,
                    )
                    .unwrap()
                }
            })
            .collect();
        for b in 1..n {
            let twice = signed_subset_sum(
                |s| Some(once[s.bits() as usize]),
                SubsetMask::from_raw(b as u32, d),
                SignRule::InclusionExclusion,
            )
            .unwrap();
            assert!((twice - table[b]).abs() < 1e-12);
        }
    }

    #[test]
    fn key_round_trip_and_rejections() {
        let a = mask(&[0, 2], 3);
        assert_eq!(a.to_key(), "[1,3]");
        assert_eq!(SubsetMask::parse_key("[1,3]", 3).unwrap(), a);
        assert_eq!(SubsetMask::parse_key("{1, 3}", 3).unwrap(), a);
        assert_eq!(SubsetMask::parse_key("1 3", 3).unwrap(), a);
        assert!(SubsetMask::parse_key("[3,1]", 3).is_err());
        assert!(SubsetMask::parse_key("[1,1]", 3).is_err());
        assert!(SubsetMask::parse_key("[0]", 3).is_err());
        assert!(SubsetMask::parse_key("[4]", 3).is_err());
        assert!(SubsetMask::parse_key("[x]", 3).is_err());
        assert_eq!(format!("{a}"), "{1,3}");
    }

    #[test]
    fn compress_expand_inverse() {
        let a = mask(&[1, 3, 4], 6);
        for b in a.subsets() {
            let c = a.compress(b);
            assert_eq!(c.dim(), 3);
            assert_eq!(a.expand(c), b);
        }
    }

    #[test]
    fn transforms_match_definitions() {
        let d = 4;
        let n = 1usize << d;
        let f: Vec<f64> = (0..n).map(|b| (b as f64 * 0.37).cos()).collect();
        let mut sub = f.clone();
        zeta_subset(&mut sub);
        let mut sup = f.clone();
        zeta_superset(&mut sup);
        for a in 0..n {
            let s: f64 = (0..n).filter(|&i| i & !a == 0).map(|i| f[i]).sum();
            assert!((sub[a] - s).abs() < 1e-12);
            let t: f64 = (0..n).filter(|&k| a & !k == 0).map(|k| f[k]).sum();
            assert!((sup[a] - t).abs() < 1e-12);
        }
        mobius_superset(&mut sup);
        for a in 0..n {
            assert!((sup[a] - f[a]).abs() < 1e-12);
        }
    }
}
