//! Sparse exterior algebra over the free `Z`-module on the lines of `X_r`.
//!
//! A weight-`k` element is a finite integer combination of basis monomials
//! `l_{i_1} ^ ... ^ l_{i_k}` with strictly increasing line indices.  Only the
//! nonzero coefficients are stored; every mutation keeps keys sorted by
//! re-sorting index tuples and tracking the permutation sign.  Coefficient
//! arithmetic is overflow-checked: the tau family only ever produces small
//! coefficients, so saturation or wrap-around would signal a logic error.

use std::collections::HashMap;
use std::fmt;

use crate::curves::{CurveError, SurfaceData};
use crate::weyl::WeylElement;

/// Largest supported wedge weight (`r - 2` with `r <= 8`).
pub const MAX_WEIGHT: usize = 6;

/// Strictly increasing tuple of line indices naming a basis monomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WedgeKey {
    len: u8,
    idx: [u16; MAX_WEIGHT],
}

impl WedgeKey {
    /// Key from strictly increasing indices.
    pub fn from_sorted(indices: &[u16]) -> Self {
        assert!(indices.len() <= MAX_WEIGHT, "wedge weight above {MAX_WEIGHT}");
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]),
            "wedge key indices must be strictly increasing"
        );
        let mut idx = [u16::MAX; MAX_WEIGHT];
        idx[..indices.len()].copy_from_slice(indices);
        WedgeKey { len: indices.len() as u8, idx }
    }

    pub fn indices(&self) -> &[u16] {
        &self.idx[..self.len as usize]
    }

    pub fn weight(&self) -> usize {
        self.len as usize
    }
}

impl fmt::Debug for WedgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices())
    }
}

/// Sorts indices in place, returning the permutation sign, or `None` if an
/// index repeats (in which case the monomial is zero).
pub fn sort_with_sign(indices: &mut [u16]) -> Option<i64> {
    let mut sign = 1i64;
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && indices[j - 1] == indices[j] {
            return None;
        }
    }
    Some(sign)
}

/// Sparse integer element of `Wedge^k Z^{lines}`.
#[derive(Clone, PartialEq, Eq)]
pub struct WedgeVector {
    weight: u8,
    terms: HashMap<WedgeKey, i64>,
}

impl WedgeVector {
    pub fn zero(weight: usize) -> Self {
        assert!(weight <= MAX_WEIGHT);
        WedgeVector { weight: weight as u8, terms: HashMap::new() }
    }

    pub fn weight(&self) -> usize {
        self.weight as usize
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) monomials.
    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WedgeKey, &i64)> {
        self.terms.iter()
    }

    /// Terms sorted by key, for deterministic output and comparison dumps.
    pub fn sorted_terms(&self) -> Vec<(WedgeKey, i64)> {
        let mut v: Vec<(WedgeKey, i64)> = self.terms.iter().map(|(k, &c)| (*k, c)).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Coefficient of the monomial on `indices` (any order; repeats give 0).
    pub fn coefficient(&self, indices: &[u16]) -> i64 {
        let mut sorted = indices.to_vec();
        let Some(sign) = sort_with_sign(&mut sorted) else { return 0 };
        let key = WedgeKey::from_sorted(&sorted);
        sign * self.terms.get(&key).copied().unwrap_or(0)
    }

    pub(crate) fn insert_signed(&mut self, key: WedgeKey, coeff: i64) {
        debug_assert_eq!(key.weight(), self.weight());
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(key).or_insert(0);
        *entry = entry.checked_add(coeff).expect("wedge coefficient overflow");
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }

    /// `self += n * other`.
    pub fn add_scaled(&mut self, other: &WedgeVector, n: i64) {
        assert_eq!(self.weight, other.weight, "adding wedges of different weight");
        for (key, &c) in &other.terms {
            let scaled = c.checked_mul(n).expect("wedge coefficient overflow");
            self.insert_signed(*key, scaled);
        }
    }

    pub fn scale(&mut self, n: i64) {
        if n == 0 {
            self.terms.clear();
            return;
        }
        for c in self.terms.values_mut() {
            *c = c.checked_mul(n).expect("wedge coefficient overflow");
        }
    }

    pub fn plus(&self, other: &WedgeVector) -> WedgeVector {
        let mut out = self.clone();
        out.add_scaled(other, 1);
        out
    }

    /// Relabels line indices through an injective permutation, re-sorting
    /// each key and absorbing the permutation sign into the coefficient.
    pub fn permute_lines(&self, perm: &[u16]) -> WedgeVector {
        let mut out = WedgeVector::zero(self.weight());
        for (key, &c) in &self.terms {
            let mut mapped: Vec<u16> =
                key.indices().iter().map(|&i| perm[i as usize]).collect();
            let sign = sort_with_sign(&mut mapped)
                .expect("line permutation must be injective on keys");
            out.insert_signed(WedgeKey::from_sorted(&mapped), sign * c);
        }
        out
    }

    /// Distinct line indices appearing in the support.
    pub fn support_lines(&self) -> Vec<u16> {
        let mut lines: Vec<u16> =
            self.terms.keys().flat_map(|k| k.indices().iter().copied()).collect();
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

impl fmt::Debug for WedgeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        write!(f, "WedgeVector(weight={}, {} terms)", self.weight, terms.len())?;
        for (key, c) in terms.iter().take(16) {
            write!(f, " {c:+}*{key:?}")?;
        }
        if terms.len() > 16 {
            write!(f, " ...")?;
        }
        Ok(())
    }
}

/// Expands `(sum of lines)_1 ^ ... ^ (sum of lines)_k` distributively.
///
/// Each factor is a list of `(line index, coefficient)` with distinct lines.
/// Picks with a repeated line vanish and are skipped early; every surviving
/// pick is sorted into a key with its permutation sign.
pub fn wedge_of_sums(factors: &[Vec<(u16, i64)>]) -> WedgeVector {
    let weight = factors.len();
    let mut out = WedgeVector::zero(weight);
    let mut picked: Vec<u16> = Vec::with_capacity(weight);
    expand(factors, &mut picked, 1, &mut out);
    out
}

fn expand(factors: &[Vec<(u16, i64)>], picked: &mut Vec<u16>, coeff: i64, out: &mut WedgeVector) {
    let depth = picked.len();
    if depth == factors.len() {
        let mut key = picked.clone();
        if let Some(sign) = sort_with_sign(&mut key) {
            out.insert_signed(
                WedgeKey::from_sorted(&key),
                coeff.checked_mul(sign).expect("wedge coefficient overflow"),
            );
        }
        return;
    }
    for &(line, c) in &factors[depth] {
        if c == 0 || picked.contains(&line) {
            continue;
        }
        picked.push(line);
        expand(
            factors,
            picked,
            coeff.checked_mul(c).expect("wedge coefficient overflow"),
            out,
        );
        picked.pop();
    }
}

/// Action of a Weyl element: permutes line indices by the induced line
/// permutation (with signs from key re-sorting).
pub fn weyl_act(
    w: &WeylElement,
    u: &WedgeVector,
    data: &SurfaceData,
) -> Result<WedgeVector, CurveError> {
    let perm = data.line_permutation(w)?;
    Ok(u.permute_lines(&perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn key_sorting_tracks_sign() {
        let mut k = vec![5u16, 3];
        assert_eq!(sort_with_sign(&mut k), Some(-1));
        assert_eq!(k, vec![3, 5]);
        let mut k = vec![1u16, 2, 3];
        assert_eq!(sort_with_sign(&mut k), Some(1));
        let mut k = vec![3u16, 1, 2];
        assert_eq!(sort_with_sign(&mut k), Some(1)); // cyclic, even
        let mut k = vec![2u16, 2];
        assert_eq!(sort_with_sign(&mut k), None);
    }

    #[test]
    fn wedge_of_sums_expands_distributively() {
        // (a + b) ^ (c - d) = a^c - a^d + b^c - b^d  with a<b<c<d.
        let u = wedge_of_sums(&[vec![(0, 1), (1, 1)], vec![(2, 1), (3, -1)]]);
        assert_eq!(u.coefficient(&[0, 2]), 1);
        assert_eq!(u.coefficient(&[0, 3]), -1);
        assert_eq!(u.coefficient(&[1, 2]), 1);
        assert_eq!(u.coefficient(&[1, 3]), -1);
        assert_eq!(u.support_size(), 4);
        // Coefficient queries see the antisymmetry.
        assert_eq!(u.coefficient(&[2, 0]), -1);
        assert_eq!(u.coefficient(&[2, 2]), 0);
    }

    #[test]
    fn repeated_line_terms_vanish() {
        let u = wedge_of_sums(&[vec![(4, 1)], vec![(4, 1)]]);
        assert!(u.is_zero());
        // (a + b) ^ (a - b) = -2 a^b.
        let v = wedge_of_sums(&[vec![(0, 1), (1, 1)], vec![(0, 1), (1, -1)]]);
        assert_eq!(v.coefficient(&[0, 1]), -2);
        assert_eq!(v.support_size(), 1);
    }

    #[test]
    fn add_scaled_cancels_to_zero() {
        let u = wedge_of_sums(&[vec![(0, 1), (2, 3)], vec![(5, 2)]]);
        let mut w = u.clone();
        w.add_scaled(&u, -1);
        assert!(w.is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        /// Swapping two factors negates the expansion.
        #[test]
        fn factor_swap_antisymmetry(
            f0 in proptest::collection::vec((0u16..12, -3i64..4), 1..4),
            f1 in proptest::collection::vec((0u16..12, -3i64..4), 1..4),
            f2 in proptest::collection::vec((0u16..12, -3i64..4), 1..4),
        ) {
            let (f0, f1, f2) = (dedup(f0), dedup(f1), dedup(f2));
            let a = wedge_of_sums(&[f0.clone(), f1.clone(), f2.clone()]);
            let mut b = wedge_of_sums(&[f1, f0, f2]);
            b.add_scaled(&a, 1);
            prop_assert!(b.is_zero());
        }

        /// Scaling one factor scales the expansion (multilinearity).
        #[test]
        fn factor_scaling_is_linear(
            f0 in proptest::collection::vec((0u16..12, -3i64..4), 1..4),
            f1 in proptest::collection::vec((0u16..12, -3i64..4), 1..4),
            lambda in -3i64..4,
        ) {
            let (f0, f1) = (dedup(f0), dedup(f1));
            let scaled: Vec<(u16, i64)> =
                f0.iter().map(|&(l, c)| (l, c * lambda)).collect();
            let mut a = wedge_of_sums(&[f0, f1.clone()]);
            a.scale(lambda);
            let b = wedge_of_sums(&[scaled, f1]);
            prop_assert_eq!(a, b);
        }

        /// Relabeling lines through a permutation is a module map compatible
        /// with expansion.
        #[test]
        fn permutation_commutes_with_expansion(
            f0 in proptest::collection::vec((0u16..12, -3i64..4), 1..4),
            f1 in proptest::collection::vec((0u16..12, -3i64..4), 1..4),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let (f0, f1) = (dedup(f0), dedup(f1));
            let mut perm: Vec<u16> = (0..12).collect();
            perm.shuffle(&mut rand_chacha::ChaCha12Rng::seed_from_u64(seed));
            let mapped = |f: &[(u16, i64)]| -> Vec<(u16, i64)> {
                f.iter().map(|&(l, c)| (perm[l as usize], c)).collect()
            };
            let a = wedge_of_sums(&[f0.clone(), f1.clone()]).permute_lines(&perm);
            let b = wedge_of_sums(&[mapped(&f0), mapped(&f1)]);
            prop_assert_eq!(a, b);
        }
    }

    fn dedup(f: Vec<(u16, i64)>) -> Vec<(u16, i64)> {
        let mut out: Vec<(u16, i64)> = Vec::new();
        for (l, c) in f {
            if !out.iter().any(|&(ol, _)| ol == l) {
                out.push((l, c));
            }
        }
        out
    }
}
