//! Weyl group of `Pic(X_r)` and orbit enumeration with witnesses.
//!
//! The group is generated by the simple reflections `s_1, ..., s_r` attached
//! to the simple roots
//!
//! ```text
//! alpha_i = e_i - e_{i+1}   (1 <= i < r),      alpha_r = h - e_1 - e_2 - e_3,
//! ```
//!
//! acting by `s_alpha(beta) = beta + (beta . alpha) alpha` (each root has
//! self-intersection -2, so this is an involution).  The reflections `s_i`
//! with `i < r` permute the exceptional classes; `s_r` is the quadratic
//! Cremona move on the first three points, acting as
//!
//! ```text
//! h   -> 2h - e_1 - e_2 - e_3,
//! e_i -> h - e_j - e_k      ({i, j, k} = {1, 2, 3}),
//! e_k -> e_k                 (k >= 4).
//! ```
//!
//! Those three actions are asserted when a reflection is constructed; with
//! the (inconsistent) alternative root `3h - e_1 - e_2 - e_3` the formula is
//! not even an involution, so the assertion pins the convention down.
//!
//! Elements are stored as exact integer matrices on the coordinate vectors
//! `(d, m_1, ..., m_r)`; the determinant (always plus or minus 1) is cached
//! and serves as the signature character.

use std::collections::HashMap;

use thiserror::Error;

use crate::picard::PicClass;
use crate::ratlin::RatMat;

/// Upper bound on orbit sizes; exceeding it aborts enumeration.
pub const ORBIT_BOUND: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error("orbit exceeded the safety bound of {0} elements")]
    BoundExceeded(usize),
}

/// An element of the Weyl group `W_r` as an integer matrix on coordinates.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WeylElement {
    r: usize,
    /// Row-major `(r+1) x (r+1)` matrix acting on `(d, m_1, ..., m_r)`.
    mat: Vec<i64>,
    det: i8,
}

impl WeylElement {
    fn n(&self) -> usize {
        self.r + 1
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn identity(r: usize) -> Self {
        let n = r + 1;
        let mut mat = vec![0; n * n];
        for i in 0..n {
            mat[i * n + i] = 1;
        }
        WeylElement { r, mat, det: 1 }
    }

    /// The simple reflection `s_i` (1-based, `1 <= i <= r`).
    pub fn simple_reflection(r: usize, i: usize) -> Self {
        assert!((1..=r).contains(&i), "generator index {i} out of 1..={r}");
        let alpha = if i < r {
            let mut m = vec![0; r];
            m[i - 1] = -1;
            m[i] = 1;
            PicClass::new(0, m) // e_i - e_{i+1}
        } else {
            let mut m = vec![0; r];
            m[..3].fill(1);
            PicClass::new(1, m) // h - e_1 - e_2 - e_3
        };
        assert_eq!(alpha.self_intersection(), -2, "simple root must have square -2");

        let n = r + 1;
        let mut mat = vec![0i64; n * n];
        for col in 0..n {
            let mut coords = vec![0i64; n];
            coords[col] = 1;
            let basis = PicClass::from_coords(&coords);
            let scale = basis.intersect(&alpha);
            let image_coords: Vec<i64> = basis
                .coords()
                .iter()
                .zip(alpha.coords())
                .map(|(b, a)| b + scale * a)
                .collect();
            for row in 0..n {
                mat[row * n + col] = image_coords[row];
            }
        }
        let w = WeylElement { r, mat, det: -1 };
        debug_assert_eq!(w.det_exact(), -1);

        if i == r {
            // Pin the conventional action of the Cremona reflection.
            let h = PicClass::hyperplane(r);
            let mut two_h_minus_e123 = vec![0; r];
            two_h_minus_e123[..3].fill(1);
            assert_eq!(w.apply(&h), PicClass::new(2, two_h_minus_e123));
            assert_eq!(w.apply(&PicClass::exceptional(r, 1)), &h - &sum_e(r, &[2, 3]));
            if r >= 4 {
                let e4 = PicClass::exceptional(r, 4);
                assert_eq!(w.apply(&e4), e4);
            }
        }
        w
    }

    /// All simple reflections `s_1, ..., s_r` in generator order.
    pub fn generators(r: usize) -> Vec<WeylElement> {
        (1..=r).map(|i| WeylElement::simple_reflection(r, i)).collect()
    }

    /// Image of a class under this element.
    pub fn apply(&self, c: &PicClass) -> PicClass {
        assert_eq!(c.r(), self.r, "class lives on X_{}, element on X_{}", c.r(), self.r);
        let n = self.n();
        let coords = c.coords();
        let mut out = vec![0i64; n];
        for row in 0..n {
            let mut acc: i128 = 0;
            for col in 0..n {
                acc += (self.mat[row * n + col] as i128) * (coords[col] as i128);
            }
            out[row] = i64::try_from(acc).expect("coordinate overflow in Weyl action");
        }
        PicClass::from_coords(&out)
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        assert_eq!(self.r, other.r);
        let n = self.n();
        let mut mat = vec![0i64; n * n];
        for row in 0..n {
            for col in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    acc += (self.mat[row * n + k] as i128) * (other.mat[k * n + col] as i128);
                }
                mat[row * n + col] = i64::try_from(acc).expect("matrix overflow in composition");
            }
        }
        WeylElement { r: self.r, mat, det: self.det * other.det }
    }

    /// Product of the simple reflections named by `word`, applied left to
    /// right: `from_word(r, [a, b]) = s_b . s_a`, so that
    /// `from_word(word).apply(c)` equals folding `c` through `s_a` then `s_b`.
    pub fn from_word(r: usize, word: &[u8]) -> WeylElement {
        let gens = WeylElement::generators(r);
        let mut acc = WeylElement::identity(r);
        for &g in word {
            assert!((1..=r as u8).contains(&g), "generator {g} out of range");
            acc = gens[g as usize - 1].compose(&acc);
        }
        acc
    }

    /// Exact inverse (the matrix is unimodular).
    pub fn inverse(&self) -> WeylElement {
        let n = self.n();
        let m = RatMat::from_i64(
            &(0..n).map(|row| self.mat[row * n..(row + 1) * n].to_vec()).collect::<Vec<_>>(),
        );
        let inv = m.invert().expect("Weyl element must be invertible");
        let mut mat = vec![0i64; n * n];
        for (row, r_vals) in inv.rows.iter().enumerate() {
            for (col, v) in r_vals.iter().enumerate() {
                assert!(v.is_integer(), "inverse of a unimodular matrix must be integral");
                mat[row * n + col] = i64::try_from(v.to_integer()).expect("inverse entry overflow");
            }
        }
        WeylElement { r: self.r, mat, det: self.det }
    }

    /// Signature character: the determinant, always +1 or -1.
    pub fn signature(&self) -> i8 {
        self.det
    }

    fn det_exact(&self) -> i64 {
        let n = self.n();
        let m = RatMat::from_i64(
            &(0..n).map(|row| self.mat[row * n..(row + 1) * n].to_vec()).collect::<Vec<_>>(),
        );
        let d = m.det();
        assert!(d.is_integer());
        let d = i64::try_from(d.to_integer()).expect("determinant overflow");
        assert!(d == 1 || d == -1, "Weyl element determinant must be +-1, got {d}");
        d
    }
}

impl std::fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.n();
        writeln!(f, "WeylElement(r={}, det={})", self.r, self.det)?;
        for row in 0..n {
            writeln!(f, "  {:?}", &self.mat[row * n..(row + 1) * n])?;
        }
        Ok(())
    }
}

fn sum_e(r: usize, idx: &[usize]) -> PicClass {
    let mut acc = PicClass::new(0, vec![0; r]);
    for &i in idx {
        acc = &acc + &PicClass::exceptional(r, i);
    }
    acc
}

/// A Weyl orbit together with a witness word for every element.
///
/// Elements are sorted lexicographically by coordinates.  The witness word
/// `[a, b, ...]` of an element `x` satisfies `apply s_a, then s_b, ... to the
/// seed = x`; equivalently `WeylElement::from_word(r, word).apply(seed) == x`.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    pub seed: PicClass,
    pub elements: Vec<PicClass>,
    pub witness_words: Vec<Vec<u8>>,
    index: HashMap<Vec<i64>, u32>,
}

impl OrbitTable {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, c: &PicClass) -> Option<usize> {
        self.index.get(&c.coords()).map(|&i| i as usize)
    }
}

/// Breadth-first closure of `seed` under the simple reflections.
///
/// Generators are tried in ascending index order from a FIFO queue, so the
/// traversal (and every witness word) is deterministic.  Witness words are
/// read off parent pointers; each has the minimal BFS depth.
pub fn orbit_with_witness(seed: &PicClass, r: usize) -> Result<OrbitTable, OrbitError> {
    assert_eq!(seed.r(), r);
    let gens = WeylElement::generators(r);

    let mut discovered: HashMap<Vec<i64>, u32> = HashMap::new();
    let mut elements: Vec<PicClass> = Vec::new();
    let mut parents: Vec<Option<(u32, u8)>> = Vec::new();

    discovered.insert(seed.coords(), 0);
    elements.push(seed.clone());
    parents.push(None);

    let mut head = 0usize;
    while head < elements.len() {
        let current = elements[head].clone();
        for (gi, g) in gens.iter().enumerate() {
            let image = g.apply(&current);
            let coords = image.coords();
            if !discovered.contains_key(&coords) {
                if elements.len() >= ORBIT_BOUND {
                    return Err(OrbitError::BoundExceeded(ORBIT_BOUND));
                }
                discovered.insert(coords, elements.len() as u32);
                elements.push(image);
                parents.push(Some((head as u32, gi as u8 + 1)));
            }
        }
        head += 1;
    }

    let mut words: Vec<Vec<u8>> = vec![Vec::new(); elements.len()];
    for i in 0..elements.len() {
        let mut word = Vec::new();
        let mut cursor = i;
        while let Some((parent, gen)) = parents[cursor] {
            word.push(gen);
            cursor = parent as usize;
        }
        word.reverse();
        words[i] = word;
    }

    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| elements[a].cmp(&elements[b]));
    let elements_sorted: Vec<PicClass> = order.iter().map(|&i| elements[i].clone()).collect();
    let words_sorted: Vec<Vec<u8>> = order.iter().map(|&i| words[i].clone()).collect();
    let index = elements_sorted
        .iter()
        .enumerate()
        .map(|(i, c)| (c.coords(), i as u32))
        .collect();

    Ok(OrbitTable {
        seed: seed.clone(),
        elements: elements_sorted,
        witness_words: words_sorted,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_word(rng: &mut ChaCha12Rng, r: usize, len: usize) -> Vec<u8> {
        (0..len).map(|_| rng.random_range(1..=r as u8)).collect()
    }

    #[test]
    fn transpositions_permute_exceptional_classes() {
        let r = 4;
        let s1 = WeylElement::simple_reflection(r, 1);
        let e1 = PicClass::exceptional(r, 1);
        let e2 = PicClass::exceptional(r, 2);
        assert_eq!(s1.apply(&e1), e2);
        assert_eq!(s1.apply(&e2), e1);
        assert_eq!(s1.apply(&PicClass::hyperplane(r)), PicClass::hyperplane(r));
        assert_eq!(s1.apply(&PicClass::exceptional(r, 3)), PicClass::exceptional(r, 3));
    }

    #[test]
    fn cremona_reflection_action() {
        for r in 3..=8 {
            let sr = WeylElement::simple_reflection(r, r);
            let h = PicClass::hyperplane(r);
            assert_eq!(sr.apply(&h).coords()[..4], [2, 1, 1, 1]);
            // e_1 -> h - e_2 - e_3
            let img = sr.apply(&PicClass::exceptional(r, 1));
            assert_eq!(img.d(), 1);
            assert_eq!(&img.m()[..3], &[0, 1, 1]);
            if r >= 4 {
                let e4 = PicClass::exceptional(r, 4);
                assert_eq!(sr.apply(&e4), e4);
            }
        }
    }

    #[test]
    fn reflections_are_involutions_with_signature_minus_one() {
        for r in 3..=8 {
            let id = WeylElement::identity(r);
            for i in 1..=r {
                let s = WeylElement::simple_reflection(r, i);
                assert_eq!(s.signature(), -1);
                assert_eq!(s.compose(&s), id);
            }
        }
    }

    #[test]
    fn action_preserves_intersection_and_canonical_class() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for r in 3..=8 {
            let k = PicClass::canonical(r);
            for _ in 0..20 {
                let w = WeylElement::from_word(r, &random_word(&mut rng, r, 15));
                assert_eq!(w.apply(&k), k);
                let a = PicClass::new(
                    rng.random_range(-4..5),
                    (0..r).map(|_| rng.random_range(-3..4)).collect(),
                );
                let b = PicClass::new(
                    rng.random_range(-4..5),
                    (0..r).map(|_| rng.random_range(-3..4)).collect(),
                );
                assert_eq!(w.apply(&a).intersect(&w.apply(&b)), a.intersect(&b));
            }
        }
    }

    #[test]
    fn signature_is_multiplicative_and_word_parity() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for r in [3usize, 5, 8] {
            for _ in 0..10 {
                let len = rng.random_range(0..25);
                let word = random_word(&mut rng, r, len);
                let w = WeylElement::from_word(r, &word);
                assert_eq!(w.signature() as i32, if len % 2 == 0 { 1 } else { -1 });
                let v = WeylElement::from_word(r, &random_word(&mut rng, r, 8));
                assert_eq!(
                    w.compose(&v).signature(),
                    w.signature() * v.signature()
                );
            }
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for r in 3..=8 {
            let id = WeylElement::identity(r);
            for _ in 0..5 {
                let w = WeylElement::from_word(r, &random_word(&mut rng, r, 12));
                assert_eq!(w.compose(&w.inverse()), id);
                assert_eq!(w.inverse().compose(&w), id);
                assert_eq!(w.inverse().signature(), w.signature());
            }
        }
    }

    #[test]
    fn orbit_of_a_line_class_on_x3() {
        let orbit = orbit_with_witness(&PicClass::exceptional(3, 1), 3).unwrap();
        assert_eq!(orbit.len(), 6);
        // Sorted lexicographically: e_1, e_2, e_3, then the three lines h-e_i-e_j.
        assert_eq!(orbit.elements[0], PicClass::exceptional(3, 1));
        assert_eq!(orbit.elements[3].coords(), vec![1, 0, 1, 1]);
        assert_eq!(orbit.elements[5].coords(), vec![1, 1, 1, 0]);
    }

    #[test]
    fn witness_words_reproduce_elements_with_correct_parity() {
        for r in [3usize, 4, 5] {
            let seed = &PicClass::hyperplane(r) - &PicClass::exceptional(r, 1);
            let orbit = orbit_with_witness(&seed, r).unwrap();
            for (element, word) in orbit.elements.iter().zip(&orbit.witness_words) {
                let w = WeylElement::from_word(r, word);
                assert_eq!(&w.apply(&seed), element);
                assert_eq!(w.signature() as i32, if word.len() % 2 == 0 { 1 } else { -1 });
            }
        }
    }

    #[test]
    fn orbit_enumeration_is_deterministic() {
        let seed = PicClass::exceptional(6, 2);
        let a = orbit_with_witness(&seed, 6).unwrap();
        let b = orbit_with_witness(&seed, 6).unwrap();
        assert_eq!(a.elements, b.elements);
        assert_eq!(a.witness_words, b.witness_words);
    }
}
