//! Lines, conic fibration classes, reducible fibers, and the type census.
//!
//! On `X_r` a *line* is a class `l` with `l.l = -1` and degree 1; a *conic
//! class* is a class `c` with `c.c = 0` and degree 2.  Both sets are finite
//! Weyl orbits (of `e_1` and `h - e_1` respectively) with known sizes:
//!
//! ```text
//! r       3    4     5     6     7      8
//! lines   6   10    16    27    56    240
//! conics  3    5    10    27   126   2160
//! ```
//!
//! Every conic class `c` has exactly `r - 1` reducible fibers, each a pair of
//! lines `{l, l'}` with `l + l' = c` and `l . l' = 1`.  An *exceptional
//! tuple* is a tuple of pairwise disjoint lines; a tuple of length `r - 2`
//! lies on exactly two conic classes, which is the combinatorial engine
//! behind the pair structure of the tau family.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::picard::{PicClass, TypeSymbol};
use crate::weyl::{orbit_with_witness, OrbitError, WeylElement};

/// Lines on `X_r`, `r = 3..8`.
pub const LINE_COUNTS: [usize; 6] = [6, 10, 16, 27, 56, 240];
/// Conic classes on `X_r`, `r = 3..8`.
pub const CONIC_COUNTS: [usize; 6] = [3, 5, 10, 27, 126, 2160];

pub fn expected_line_count(r: usize) -> usize {
    LINE_COUNTS[r - 3]
}

pub fn expected_conic_count(r: usize) -> usize {
    CONIC_COUNTS[r - 3]
}

#[derive(Debug, Error)]
pub enum CurveError {
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("expected {expected} {what} on X_{r}, enumerated {got}")]
    CountMismatch { what: &'static str, r: usize, expected: usize, got: usize },
    #[error("enumerated class {0} fails the {1} test")]
    InvalidMember(String, &'static str),
    #[error("line index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("repeated line index {0} in tuple")]
    RepeatedIndex(usize),
    #[error("conic {class} has {got} reducible fibers, expected {expected}")]
    FiberCount { class: String, got: usize, expected: usize },
    #[error("witness word does not map the orbit seed to its element")]
    WitnessMismatch,
    #[error("tuple is not exceptional (lines {0} and {1} meet)")]
    NotExceptional(usize, usize),
    #[error("exceptional tuple lies on {got} conic classes, expected exactly 2")]
    ConicsThroughTuple { got: usize },
    #[error("could not sample an exceptional tuple after {0} attempts")]
    SamplingExhausted(usize),
    #[error("image of line {0} under the Weyl element is not a line")]
    ImageNotALine(usize),
}

/// The lines of `X_r`, sorted lexicographically by coordinates.
///
/// The sorted position of a line is its *index*; all wedge keys and fiber
/// records refer to lines by index.
#[derive(Clone, Debug)]
pub struct LineSet {
    r: usize,
    classes: Vec<PicClass>,
    index: HashMap<Vec<i64>, u16>,
    pairing: Vec<i64>,
}

impl LineSet {
    pub fn enumerate(r: usize) -> Result<LineSet, CurveError> {
        let orbit = orbit_with_witness(&PicClass::exceptional(r, 1), r)?;
        let classes = orbit.elements;
        for l in &classes {
            if l.self_intersection() != -1 {
                return Err(CurveError::InvalidMember(l.to_string(), "self-intersection -1"));
            }
            if l.degree() != 1 {
                return Err(CurveError::InvalidMember(l.to_string(), "degree 1"));
            }
        }
        let expected = expected_line_count(r);
        if classes.len() != expected {
            return Err(CurveError::CountMismatch {
                what: "lines",
                r,
                expected,
                got: classes.len(),
            });
        }
        let index = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.coords(), i as u16))
            .collect();
        let n = classes.len();
        let mut pairing = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                pairing[i * n + j] = classes[i].intersect(&classes[j]);
            }
        }
        Ok(LineSet { r, classes, index, pairing })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[PicClass] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &PicClass {
        &self.classes[i]
    }

    pub fn index_of(&self, c: &PicClass) -> Option<usize> {
        self.index.get(&c.coords()).map(|&i| i as usize)
    }

    /// Intersection number of lines `i` and `j` from the precomputed table.
    pub fn pairing(&self, i: usize, j: usize) -> i64 {
        self.pairing[i * self.classes.len() + j]
    }
}

/// The conic classes of `X_r`, sorted lexicographically, each with a witness
/// word `word` such that `from_word(r, word)` maps `h - e_1` to the class.
#[derive(Clone, Debug)]
pub struct ConicSet {
    r: usize,
    classes: Vec<PicClass>,
    witness_words: Vec<Vec<u8>>,
    index: HashMap<Vec<i64>, u16>,
    base_index: usize,
}

impl ConicSet {
    pub fn enumerate(r: usize) -> Result<ConicSet, CurveError> {
        let seed = &PicClass::hyperplane(r) - &PicClass::exceptional(r, 1);
        let orbit = orbit_with_witness(&seed, r)?;
        for c in &orbit.elements {
            if c.self_intersection() != 0 {
                return Err(CurveError::InvalidMember(c.to_string(), "self-intersection 0"));
            }
            if c.degree() != 2 {
                return Err(CurveError::InvalidMember(c.to_string(), "degree 2"));
            }
        }
        let expected = expected_conic_count(r);
        if orbit.elements.len() != expected {
            return Err(CurveError::CountMismatch {
                what: "conic classes",
                r,
                expected,
                got: orbit.elements.len(),
            });
        }
        // Witness words come from BFS parent pointers; verify them here once
        // so that downstream sign bookkeeping can rely on them blindly.
        for (c, word) in orbit.elements.iter().zip(&orbit.witness_words) {
            let mut image = seed.clone();
            for &g in word {
                image = WeylElement::simple_reflection(r, g as usize).apply(&image);
            }
            if &image != c {
                return Err(CurveError::WitnessMismatch);
            }
        }
        let index = orbit
            .elements
            .iter()
            .enumerate()
            .map(|(i, c)| (c.coords(), i as u16))
            .collect();
        let base_index = orbit
            .elements
            .iter()
            .position(|c| c == &seed)
            .expect("seed class must lie in its own orbit");
        Ok(ConicSet {
            r,
            classes: orbit.elements,
            witness_words: orbit.witness_words,
            index,
            base_index,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[PicClass] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &PicClass {
        &self.classes[i]
    }

    pub fn witness_word(&self, i: usize) -> &[u8] {
        &self.witness_words[i]
    }

    pub fn index_of(&self, c: &PicClass) -> Option<usize> {
        self.index.get(&c.coords()).map(|&i| i as usize)
    }

    /// Index of the orbit seed `h - e_1`.
    pub fn base_index(&self) -> usize {
        self.base_index
    }
}

/// A reducible fiber `{l_a, l_b}` of a conic class, by line indices `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducibleFiber {
    pub a: u16,
    pub b: u16,
}

impl ReducibleFiber {
    pub fn contains(&self, line: u16) -> bool {
        self.a == line || self.b == line
    }

    pub fn other(&self, line: u16) -> u16 {
        if line == self.a { self.b } else { self.a }
    }
}

/// All reducible fibers of `c`: pairs of lines summing to `c`.
///
/// Pairs are ordered by their smaller line index.  Exactly `r - 1` fibers
/// must exist; any other count is a hard error.
pub fn reducible_fibers(c: &PicClass, lines: &LineSet) -> Result<Vec<ReducibleFiber>, CurveError> {
    let mut fibers = Vec::new();
    for (a, la) in lines.classes().iter().enumerate() {
        let partner = c - la;
        if let Some(b) = lines.index_of(&partner) {
            if b > a {
                debug_assert_eq!(lines.pairing(a, b), 1, "fiber components must meet once");
                fibers.push(ReducibleFiber { a: a as u16, b: b as u16 });
            }
        }
    }
    let expected = c.r() - 1;
    if fibers.len() != expected {
        return Err(CurveError::FiberCount {
            class: c.to_string(),
            got: fibers.len(),
            expected,
        });
    }
    Ok(fibers)
}

const MASK_WORDS: usize = 4; // 256 bits >= 240 lines

fn mask_of(lines: impl IntoIterator<Item = u16>) -> [u64; MASK_WORDS] {
    let mut mask = [0u64; MASK_WORDS];
    for l in lines {
        mask[(l / 64) as usize] |= 1u64 << (l % 64);
    }
    mask
}

fn mask_subset(sub: &[u64; MASK_WORDS], sup: &[u64; MASK_WORDS]) -> bool {
    sub.iter().zip(sup).all(|(s, t)| s & !t == 0)
}

/// Lines, conic classes, and per-conic fiber data for one `X_r`, built once
/// and shared by the tau family, the census, and the geometric models.
#[derive(Clone, Debug)]
pub struct SurfaceData {
    pub r: usize,
    pub lines: LineSet,
    pub conics: ConicSet,
    /// Reducible fibers per conic class, in the canonical order of
    /// [`reducible_fibers`].
    pub fibers: Vec<Vec<ReducibleFiber>>,
    component_masks: Vec<[u64; MASK_WORDS]>,
}

impl SurfaceData {
    pub fn build(r: usize) -> Result<SurfaceData, CurveError> {
        let lines = LineSet::enumerate(r)?;
        let conics = ConicSet::enumerate(r)?;
        let mut fibers = Vec::with_capacity(conics.len());
        let mut component_masks = Vec::with_capacity(conics.len());
        for c in conics.classes() {
            let f = reducible_fibers(c, &lines)?;
            component_masks.push(mask_of(f.iter().flat_map(|fb| [fb.a, fb.b])));
            fibers.push(f);
        }
        Ok(SurfaceData { r, lines, conics, fibers, component_masks })
    }

    /// Wedge weight `r - 2`: the number of fibers of a conic minus one.
    pub fn weight(&self) -> usize {
        self.r - 2
    }

    pub fn conic_fibers(&self, ci: usize) -> &[ReducibleFiber] {
        &self.fibers[ci]
    }

    fn check_tuple(&self, t: &[u16]) -> Result<(), CurveError> {
        for (pos, &l) in t.iter().enumerate() {
            if l as usize >= self.lines.len() {
                return Err(CurveError::IndexOutOfRange(l as usize));
            }
            if t[..pos].contains(&l) {
                return Err(CurveError::RepeatedIndex(l as usize));
            }
        }
        Ok(())
    }

    /// Whether the (repetition-free) tuple consists of pairwise disjoint lines.
    pub fn is_exceptional_tuple(&self, t: &[u16]) -> Result<bool, CurveError> {
        self.check_tuple(t)?;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                if self.lines.pairing(t[i] as usize, t[j] as usize) != 0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The conic classes all of whose fiber components include every line of
    /// the exceptional `(r-2)`-tuple; exactly two must exist.
    pub fn conics_through_exceptional(&self, t: &[u16]) -> Result<[usize; 2], CurveError> {
        self.check_tuple(t)?;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                if self.lines.pairing(t[i] as usize, t[j] as usize) != 0 {
                    return Err(CurveError::NotExceptional(t[i] as usize, t[j] as usize));
                }
            }
        }
        let tuple_mask = mask_of(t.iter().copied());
        let mut found = Vec::new();
        for (ci, mask) in self.component_masks.iter().enumerate() {
            if mask_subset(&tuple_mask, mask) {
                found.push(ci);
            }
        }
        match found[..] {
            [a, b] => Ok([a, b]),
            _ => Err(CurveError::ConicsThroughTuple { got: found.len() }),
        }
    }

    /// Uniform-ish random exceptional `(r-2)`-tuple: greedy extension with
    /// restarts, deterministic for a fixed RNG state.
    pub fn sample_exceptional_tuple<R: rand::Rng>(
        &self,
        rng: &mut R,
    ) -> Result<Vec<u16>, CurveError> {
        const MAX_ATTEMPTS: usize = 10_000;
        let k = self.r - 2;
        for _ in 0..MAX_ATTEMPTS {
            let mut chosen: Vec<u16> = Vec::with_capacity(k);
            let mut candidates: Vec<u16> = (0..self.lines.len() as u16).collect();
            while chosen.len() < k && !candidates.is_empty() {
                let pick = candidates[rng.random_range(0..candidates.len())];
                chosen.push(pick);
                candidates.retain(|&c| {
                    c != pick && self.lines.pairing(c as usize, pick as usize) == 0
                });
            }
            if chosen.len() == k {
                return Ok(chosen);
            }
        }
        Err(CurveError::SamplingExhausted(MAX_ATTEMPTS))
    }

    /// The permutation induced by `w` on line indices: `perm[i]` is the index
    /// of the image of line `i`.
    pub fn line_permutation(&self, w: &WeylElement) -> Result<Vec<u16>, CurveError> {
        let mut perm = Vec::with_capacity(self.lines.len());
        for (i, l) in self.lines.classes().iter().enumerate() {
            let image = w.apply(l);
            match self.lines.index_of(&image) {
                Some(j) => perm.push(j as u16),
                None => return Err(CurveError::ImageNotALine(i)),
            }
        }
        Ok(perm)
    }

    /// Line permutation of a generator word, composed left to right.
    pub fn word_line_permutation(&self, word: &[u8]) -> Result<Vec<u16>, CurveError> {
        let gen_perms: Vec<Vec<u16>> = (1..=self.r)
            .map(|i| self.line_permutation(&WeylElement::simple_reflection(self.r, i)))
            .collect::<Result<_, _>>()?;
        let n = self.lines.len();
        let mut perm: Vec<u16> = (0..n as u16).collect();
        for &g in word {
            let gp = &gen_perms[g as usize - 1];
            for slot in perm.iter_mut() {
                *slot = gp[*slot as usize];
            }
        }
        Ok(perm)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Lines,
    Conics,
}

/// Census of type symbols, ordered by the natural census order (degree
/// ascending, then profile).
pub fn type_census(data: &SurfaceData, kind: CurveKind) -> Vec<(TypeSymbol, usize)> {
    let classes = match kind {
        CurveKind::Lines => data.lines.classes(),
        CurveKind::Conics => data.conics.classes(),
    };
    let mut census: BTreeMap<TypeSymbol, usize> = BTreeMap::new();
    for c in classes {
        *census.entry(c.class_type()).or_insert(0) += 1;
    }
    census.into_iter().collect()
}

/// The full `r = 8` census reference table (type symbol, count).
pub fn census_reference_x8(kind: CurveKind) -> Vec<(TypeSymbol, usize)> {
    let rows: &[(&str, usize)] = match kind {
        CurveKind::Lines => &[
            ("0;-1", 8),
            ("1;1^2", 28),
            ("2;1^5", 56),
            ("3;2,1^6", 56),
            ("4;2^3,1^5", 56),
            ("5;2^6,1^2", 28),
            ("6;3,2^7", 8),
        ],
        CurveKind::Conics => &[
            ("1;1", 8),
            ("2;1^4", 70),
            ("3;2,1^5", 168),
            ("4;2^3,1^4", 280),
            ("4;3,1^7", 8),
            ("5;2^6,1", 56),
            ("5;3,2^3,1^4", 280),
            ("6;3^2,2^4,1^2", 420),
            ("7;3^4,2^3,1", 280),
            ("7;4,3,2^6", 56),
            ("8;3^7,1", 8),
            ("8;4,3^4,2^3", 280),
            ("9;4^2,3^5,2", 168),
            ("10;4^4,3^4", 70),
            ("11;4^7,3", 8),
        ],
    };
    rows.iter()
        .map(|(s, n)| (TypeSymbol::parse(s).expect("reference table entry"), *n))
        .collect()
}

/// Orbit of a set of line indices under the Weyl group, with parent pointers
/// for witness reconstruction.  Sets are stored as sorted index vectors.
#[derive(Clone, Debug)]
pub struct TupleOrbit {
    pub seed: Vec<u16>,
    elements: Vec<Vec<u16>>,
    parents: Vec<Option<(u32, u8)>>,
    index: HashMap<Vec<u16>, u32>,
}

impl TupleOrbit {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, set: &[u16]) -> bool {
        let mut key = set.to_vec();
        key.sort_unstable();
        self.index.contains_key(&key)
    }

    /// Witness word mapping the seed *set* to the given set (as sets).
    pub fn set_witness_word(&self, set: &[u16]) -> Option<Vec<u8>> {
        let mut key = set.to_vec();
        key.sort_unstable();
        let mut cursor = *self.index.get(&key)? as usize;
        let mut word = Vec::new();
        while let Some((parent, gen)) = self.parents[cursor] {
            word.push(gen);
            cursor = parent as usize;
        }
        word.reverse();
        Some(word)
    }
}

/// BFS orbit of the exceptional seed set `{e_3, ..., e_r}` (as line indices).
pub fn exceptional_set_orbit(data: &SurfaceData) -> Result<TupleOrbit, CurveError> {
    let r = data.r;
    let seed: Vec<u16> = (3..=r)
        .map(|i| {
            data.lines
                .index_of(&PicClass::exceptional(r, i))
                .expect("exceptional class is a line") as u16
        })
        .collect();
    let mut seed_sorted = seed.clone();
    seed_sorted.sort_unstable();

    let gen_perms: Vec<Vec<u16>> = (1..=r)
        .map(|i| data.line_permutation(&WeylElement::simple_reflection(r, i)))
        .collect::<Result<_, _>>()?;

    let mut elements = vec![seed_sorted.clone()];
    let mut parents: Vec<Option<(u32, u8)>> = vec![None];
    let mut index: HashMap<Vec<u16>, u32> = HashMap::new();
    index.insert(seed_sorted, 0);

    let mut head = 0usize;
    while head < elements.len() {
        for (gi, gp) in gen_perms.iter().enumerate() {
            let mut image: Vec<u16> =
                elements[head].iter().map(|&l| gp[l as usize]).collect();
            image.sort_unstable();
            if !index.contains_key(&image) {
                if elements.len() >= crate::weyl::ORBIT_BOUND {
                    return Err(CurveError::Orbit(OrbitError::BoundExceeded(
                        crate::weyl::ORBIT_BOUND,
                    )));
                }
                index.insert(image.clone(), elements.len() as u32);
                elements.push(image);
                parents.push(Some((head as u32, gi as u8 + 1)));
            }
        }
        head += 1;
    }
    Ok(TupleOrbit { seed, elements, parents, index })
}

/// Word whose componentwise action maps the ordered seed `(e_3, ..., e_r)`
/// to the given *ordered* exceptional tuple, if the tuple lies in the orbit.
///
/// The set witness from BFS is post-composed with a permutation of
/// `e_3, ..., e_r` realized inside the generators `s_3, ..., s_{r-1}`, found
/// by a small breadth-first search in the symmetric group.
pub fn ordered_tuple_witness(
    data: &SurfaceData,
    orbit: &TupleOrbit,
    tuple: &[u16],
) -> Result<Option<Vec<u8>>, CurveError> {
    data.check_tuple(tuple)?;
    let Some(set_word) = orbit.set_witness_word(tuple) else {
        return Ok(None);
    };
    let perm = data.word_line_permutation(&set_word)?;
    // Image of the ordered seed under the set word.
    let image: Vec<u16> = orbit.seed.iter().map(|&l| perm[l as usize]).collect();
    // Need rho with image[rho(p)] == tuple[p].
    let target: Vec<usize> = tuple
        .iter()
        .map(|t| image.iter().position(|x| x == t).expect("same underlying set"))
        .collect();
    let k = tuple.len();
    // BFS in S_k over adjacent transpositions (p, p+1), i.e. generators
    // s_{p+3} acting on the seed positions.
    let identity: Vec<usize> = (0..k).collect();
    let mut word_for: HashMap<Vec<usize>, Vec<u8>> = HashMap::new();
    word_for.insert(identity.clone(), Vec::new());
    let mut queue = vec![identity];
    let mut head = 0;
    while head < queue.len() {
        let current = queue[head].clone();
        if current == target {
            break;
        }
        let base_word = word_for[&current].clone();
        for p in 0..k.saturating_sub(1) {
            // s_{p+3} swaps e_{p+3} and e_{p+4}: in position space it swaps
            // the positions currently holding p and p+1 of the seed order.
            let mut next = current.clone();
            let ia = next.iter().position(|&x| x == p).unwrap();
            let ib = next.iter().position(|&x| x == p + 1).unwrap();
            next.swap(ia, ib);
            if !word_for.contains_key(&next) {
                let mut w = base_word.clone();
                w.push((p + 3) as u8);
                word_for.insert(next.clone(), w);
                queue.push(next);
            }
        }
        head += 1;
    }
    let Some(rho_word) = word_for.get(&target) else {
        return Ok(None);
    };
    let mut full = rho_word.clone();
    full.extend_from_slice(&set_word);
    // Verify componentwise.
    let full_perm = data.word_line_permutation(&full)?;
    let final_tuple: Vec<u16> = orbit.seed.iter().map(|&l| full_perm[l as usize]).collect();
    if final_tuple == tuple {
        Ok(Some(full))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn line_and_conic_counts_match_reference() {
        for r in 3..=8 {
            let data = SurfaceData::build(r).unwrap();
            assert_eq!(data.lines.len(), expected_line_count(r), "lines on X_{r}");
            assert_eq!(data.conics.len(), expected_conic_count(r), "conics on X_{r}");
        }
    }

    #[test]
    fn x3_lines_are_exceptional_and_joining_classes() {
        let lines = LineSet::enumerate(3).unwrap();
        let coords: Vec<Vec<i64>> = lines.classes().iter().map(|c| c.coords()).collect();
        assert_eq!(
            coords,
            vec![
                vec![0, -1, 0, 0],
                vec![0, 0, -1, 0],
                vec![0, 0, 0, -1],
                vec![1, 0, 1, 1],
                vec![1, 1, 0, 1],
                vec![1, 1, 1, 0],
            ]
        );
    }

    #[test]
    fn fibers_of_the_base_conic_on_x4() {
        let data = SurfaceData::build(4).unwrap();
        let c = &PicClass::hyperplane(4) - &PicClass::exceptional(4, 1);
        let ci = data.conics.index_of(&c).unwrap();
        let fibers = data.conic_fibers(ci);
        assert_eq!(fibers.len(), 3);
        for f in fibers {
            let la = data.lines.class(f.a as usize);
            let lb = data.lines.class(f.b as usize);
            assert_eq!(&(la + lb), &c);
            assert_eq!(la.intersect(lb), 1);
        }
        // The components are exactly {e_i, h - e_1 - e_i} for i = 2, 3, 4.
        for i in 2..=4 {
            let ei = data.lines.index_of(&PicClass::exceptional(4, i)).unwrap() as u16;
            assert!(fibers.iter().any(|f| f.contains(ei)));
        }
    }

    #[test]
    fn census_x8_matches_reference_table() {
        let data = SurfaceData::build(8).unwrap();
        assert_eq!(type_census(&data, CurveKind::Lines), census_reference_x8(CurveKind::Lines));
        assert_eq!(type_census(&data, CurveKind::Conics), census_reference_x8(CurveKind::Conics));
    }

    #[test]
    fn census_counts_match_arrangement_formula_for_all_r() {
        for r in 3..=8 {
            let data = SurfaceData::build(r).unwrap();
            for kind in [CurveKind::Lines, CurveKind::Conics] {
                let census = type_census(&data, kind);
                let total: usize = census.iter().map(|(_, n)| n).sum();
                let expected_total = match kind {
                    CurveKind::Lines => expected_line_count(r),
                    CurveKind::Conics => expected_conic_count(r),
                };
                assert_eq!(total, expected_total);
                for (ty, n) in census {
                    assert_eq!(
                        n as u64,
                        ty.arrangement_count(r),
                        "type {ty} on X_{r}"
                    );
                }
            }
        }
    }

    #[test]
    fn exceptional_tuple_checks() {
        let data = SurfaceData::build(5).unwrap();
        let e = |i: usize| data.lines.index_of(&PicClass::exceptional(5, i)).unwrap() as u16;
        let l12 = data
            .lines
            .index_of(&PicClass::new(1, vec![1, 1, 0, 0, 0]))
            .unwrap() as u16;
        assert!(data.is_exceptional_tuple(&[e(1), e(2), e(3)]).unwrap());
        // e_1 meets h - e_1 - e_2.
        assert!(!data.is_exceptional_tuple(&[e(1), l12]).unwrap());
        assert!(matches!(
            data.is_exceptional_tuple(&[e(1), e(1)]),
            Err(CurveError::RepeatedIndex(_))
        ));
    }

    #[test]
    fn seed_tuple_lies_on_the_two_base_conics() {
        for r in 3..=8 {
            let data = SurfaceData::build(r).unwrap();
            let tuple: Vec<u16> = (3..=r)
                .map(|i| data.lines.index_of(&PicClass::exceptional(r, i)).unwrap() as u16)
                .collect();
            let [a, b] = data.conics_through_exceptional(&tuple).unwrap();
            let mut got = vec![data.conics.class(a).clone(), data.conics.class(b).clone()];
            got.sort();
            let mut want = vec![
                &PicClass::hyperplane(r) - &PicClass::exceptional(r, 1),
                &PicClass::hyperplane(r) - &PicClass::exceptional(r, 2),
            ];
            want.sort();
            assert_eq!(got, want, "r = {r}");
        }
    }

    #[test]
    fn sampled_tuples_lie_on_exactly_two_conics() {
        for r in 3..=8 {
            let data = SurfaceData::build(r).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(100 + r as u64);
            for _ in 0..50 {
                let t = data.sample_exceptional_tuple(&mut rng).unwrap();
                assert_eq!(t.len(), r - 2);
                assert!(data.is_exceptional_tuple(&t).unwrap());
                let [a, b] = data.conics_through_exceptional(&t).unwrap();
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn ordered_witnesses_reach_sampled_tuples() {
        for r in 3..=6 {
            let data = SurfaceData::build(r).unwrap();
            let orbit = exceptional_set_orbit(&data).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(17);
            for _ in 0..20 {
                let t = data.sample_exceptional_tuple(&mut rng).unwrap();
                let word = ordered_tuple_witness(&data, &orbit, &t)
                    .unwrap()
                    .expect("tuple must lie in the orbit");
                let perm = data.word_line_permutation(&word).unwrap();
                let image: Vec<u16> = orbit.seed.iter().map(|&l| perm[l as usize]).collect();
                assert_eq!(image, t);
            }
        }
    }

    #[test]
    fn tuple_orbit_exhausts_all_exceptional_sets() {
        // The Weyl orbit of {e_3, ..., e_r} must hit every set of r - 2
        // pairwise disjoint lines; compare against direct enumeration.
        for r in 3..=7 {
            let data = SurfaceData::build(r).unwrap();
            let orbit = exceptional_set_orbit(&data).unwrap();
            let brute = brute_force_exceptional_sets(&data);
            assert_eq!(orbit.len(), brute, "exceptional set count on X_{r}");
        }
    }

    fn brute_force_exceptional_sets(data: &SurfaceData) -> usize {
        // Count size-(r-2) sets of pairwise disjoint lines directly.
        let n = data.lines.len();
        let k = data.r - 2;
        let mut stack = vec![(Vec::<u16>::new(), 0u16)];
        let mut count = 0;
        while let Some((chosen, start)) = stack.pop() {
            if chosen.len() == k {
                count += 1;
                continue;
            }
            for next in start..n as u16 {
                if chosen
                    .iter()
                    .all(|&c| data.lines.pairing(c as usize, next as usize) == 0)
                {
                    let mut ext = chosen.clone();
                    ext.push(next);
                    stack.push((ext, next + 1));
                }
            }
        }
        count
    }
}
