//! The tau family of a del Pezzo surface and its vanishing sum.
//!
//! For the base conic class `c_1 = h - e_1` the reducible fibers are
//! `C^i = (h - e_1 - e_i) + e_i`, `i = 2, ..., r`.  Regarding each fiber as
//! the sum of its two component lines inside the free module on the lines,
//! the base tau vector is the wedge of fiber differences against the last
//! fiber:
//!
//! ```text
//! tau_base = (C^2 - C^r) ^ (C^3 - C^r) ^ ... ^ (C^{r-1} - C^r).
//! ```
//!
//! For any other conic class `c = w(c_1)` the transported vector
//! `tau_c = signature(w) * (w . tau_base)` does not depend on the choice of
//! `w`, and the family satisfies one linear relation: the sum of all tau_c
//! vanishes.  The support of every tau_c consists of keys whose lines are
//! pairwise disjoint (exceptional tuples); each such key appears in exactly
//! two members of the family, with opposite coefficients, which makes the
//! relation unique up to scale.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use thiserror::Error;

use crate::curves::{CurveError, ReducibleFiber, SurfaceData};
use crate::picard::PicClass;
use crate::ratlin;
use crate::wedge::{wedge_of_sums, WedgeKey, WedgeVector};

#[derive(Debug, Error)]
pub enum HlogError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("tau sum is nonzero on {count} keys, e.g. {sample}")]
    NonzeroSum { count: usize, sample: String },
    #[error("support key {key} appears in {count} tau vectors, expected exactly 2")]
    PairCount { key: String, count: usize },
    #[error("support key {key} carries coefficients {a} and {b}, expected opposite")]
    PairSigns { key: String, a: i64, b: i64 },
    #[error("fiber order for conic {0} is not a permutation of its reducible fibers")]
    FiberOrderMismatch(usize),
    #[error("conic {0}: tau differs from the residue wedge beyond a global sign")]
    SignUndetermined(usize),
    #[error("base fiber {0} is not a reducible fiber of the base conic")]
    BadBaseFiber(usize),
    #[error("coefficient graph is disconnected ({components} components)")]
    Disconnected { components: usize },
}

/// All tau vectors of one surface, indexed like `data.conics`.
#[derive(Clone, Debug)]
pub struct TauFamily {
    pub r: usize,
    taus: Vec<WedgeVector>,
}

impl TauFamily {
    /// Builds the whole family by transporting `tau_base` along the conic
    /// witness words.
    pub fn build(data: &SurfaceData) -> Result<TauFamily, HlogError> {
        let base = tau_base(data)?;
        let r = data.r;
        let gen_perms: Vec<Vec<u16>> = (1..=r)
            .map(|i| {
                data.line_permutation(&crate::weyl::WeylElement::simple_reflection(r, i))
            })
            .collect::<Result<_, _>>()?;

        let mut taus = Vec::with_capacity(data.conics.len());
        for ci in 0..data.conics.len() {
            let word = data.conics.witness_word(ci);
            let n = data.lines.len();
            let mut perm: Vec<u16> = (0..n as u16).collect();
            for &g in word {
                let gp = &gen_perms[g as usize - 1];
                for slot in perm.iter_mut() {
                    *slot = gp[*slot as usize];
                }
            }
            let mut tau = base.permute_lines(&perm);
            if word.len() % 2 == 1 {
                tau.scale(-1);
            }
            taus.push(tau);
        }
        Ok(TauFamily { r, taus })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn tau(&self, ci: usize) -> &WedgeVector {
        &self.taus[ci]
    }

    pub fn taus(&self) -> &[WedgeVector] {
        &self.taus
    }

    /// Test hook: flips the sign of one tau vector in place, which must make
    /// the vanishing sum and the pair structure fail.
    pub fn inject_sign_flip(&mut self, ci: usize) {
        self.taus[ci].scale(-1);
    }

    /// Test hook: negates a single coefficient of one tau vector (the first
    /// key in sorted order), which must also break the vanishing sum.
    pub fn inject_coefficient_flip(&mut self, ci: usize) {
        let (key, coeff) = self.taus[ci].sorted_terms()[0];
        self.taus[ci].insert_signed(key, -2 * coeff);
    }
}

/// The base tau vector of `c_1 = h - e_1`.
///
/// Fails if any claimed fiber `{h - e_1 - e_i, e_i}` is not actually listed
/// among the reducible fibers of the base conic.
pub fn tau_base(data: &SurfaceData) -> Result<WedgeVector, HlogError> {
    let r = data.r;
    let h = PicClass::hyperplane(r);
    let e = |i: usize| PicClass::exceptional(r, i);
    let base_ci = data.conics.base_index();

    let line_index = |c: &PicClass| -> usize {
        data.lines.index_of(c).expect("component of a base fiber must be a line")
    };
    // Fiber i = (h - e_1 - e_i) + e_i for i = 2..r; validate against the
    // enumerated fiber list.
    let fiber = |i: usize| -> Result<(u16, u16), HlogError> {
        let l1i = line_index(&(&(&h - &e(1)) - &e(i))) as u16;
        let ei = line_index(&e(i)) as u16;
        let (a, b) = if l1i < ei { (l1i, ei) } else { (ei, l1i) };
        let rf = ReducibleFiber { a, b };
        if !data.conic_fibers(base_ci).contains(&rf) {
            return Err(HlogError::BadBaseFiber(i));
        }
        Ok((l1i, ei))
    };

    let (ref_l, ref_e) = fiber(r)?;
    let mut factors = Vec::with_capacity(r - 2);
    for i in 2..r {
        let (l1i, ei) = fiber(i)?;
        factors.push(vec![(l1i, 1), (ei, 1), (ref_l, -1), (ref_e, -1)]);
    }
    Ok(wedge_of_sums(&factors))
}

/// Key of the reference exceptional tuple `(e_3, ..., e_r)`.
pub fn reference_key(data: &SurfaceData) -> WedgeKey {
    let mut idx: Vec<u16> = (3..=data.r)
        .map(|i| {
            data.lines
                .index_of(&PicClass::exceptional(data.r, i))
                .expect("exceptional class is a line") as u16
        })
        .collect();
    idx.sort_unstable();
    WedgeKey::from_sorted(&idx)
}

/// Leading coefficient: the coefficient on the reference key `(e_3 ... e_r)`.
pub fn leading_coefficient(data: &SurfaceData, u: &WedgeVector) -> i64 {
    u.coefficient(reference_key(data).indices())
}

/// Sum of the whole family; must vanish identically.
///
/// On success the (zero) sum is returned; a nonzero sum is a hard error
/// carrying a sample of offending keys.
pub fn hlog_sum(family: &TauFamily) -> Result<WedgeVector, HlogError> {
    let weight = family.taus.first().map_or(0, |t| t.weight());
    let mut sum = WedgeVector::zero(weight);
    for tau in &family.taus {
        sum.add_scaled(tau, 1);
    }
    if !sum.is_zero() {
        let terms = sum.sorted_terms();
        let sample = terms
            .iter()
            .take(4)
            .map(|(k, c)| format!("{c:+}*{k:?}"))
            .collect::<Vec<_>>()
            .join(" ");
        return Err(HlogError::NonzeroSum { count: terms.len(), sample });
    }
    Ok(sum)
}

/// Wedge of fiber differences `(F_1 - F_last) ^ ... ^ (F_{last-1} - F_last)`
/// for an explicit fiber order, each fiber standing for the sum of its two
/// component lines.
pub fn residue_wedge(
    data: &SurfaceData,
    ci: usize,
    fiber_order: &[ReducibleFiber],
) -> Result<WedgeVector, HlogError> {
    let mut canonical: Vec<ReducibleFiber> = data.conic_fibers(ci).to_vec();
    let mut given = fiber_order.to_vec();
    canonical.sort_unstable();
    given.sort_unstable();
    if canonical != given {
        return Err(HlogError::FiberOrderMismatch(ci));
    }
    let last = fiber_order[fiber_order.len() - 1];
    let factors: Vec<Vec<(u16, i64)>> = fiber_order[..fiber_order.len() - 1]
        .iter()
        .map(|f| vec![(f.a, 1), (f.b, 1), (last.a, -1), (last.b, -1)])
        .collect();
    Ok(wedge_of_sums(&factors))
}

/// The sign `s` with `tau_c = s * residue_wedge(c, fiber_order)`.
///
/// Exact equality (up to the global sign) is guaranteed; anything else is a
/// hard error.
pub fn epsilon_sign(
    family: &TauFamily,
    data: &SurfaceData,
    ci: usize,
    fiber_order: &[ReducibleFiber],
) -> Result<i8, HlogError> {
    let mut rw = residue_wedge(data, ci, fiber_order)?;
    if &rw == family.tau(ci) {
        return Ok(1);
    }
    rw.scale(-1);
    if &rw == family.tau(ci) {
        return Ok(-1);
    }
    Err(HlogError::SignUndetermined(ci))
}

/// Pair structure and connectivity of the coefficient graph.
///
/// Vertices are the conic classes; every support key is an edge between the
/// two tau vectors whose support contains it.  The graph being connected
/// forces any linear relation among the tau vectors to be a multiple of the
/// all-ones relation.
#[derive(Clone, Debug)]
pub struct CoefficientGraph {
    pub distinct_keys: usize,
    pub components: usize,
    pub connected: bool,
}

pub fn coefficient_graph(family: &TauFamily) -> Result<CoefficientGraph, HlogError> {
    let mut by_key: HashMap<WedgeKey, Vec<(u32, i64)>> = HashMap::new();
    for (ci, tau) in family.taus.iter().enumerate() {
        for (key, &coeff) in tau.iter() {
            by_key.entry(*key).or_default().push((ci as u32, coeff));
        }
    }
    let n = family.len();
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (key, entries) in &by_key {
        if entries.len() != 2 {
            return Err(HlogError::PairCount {
                key: format!("{key:?}"),
                count: entries.len(),
            });
        }
        let (a, ca) = entries[0];
        let (b, cb) = entries[1];
        if ca != -cb {
            return Err(HlogError::PairSigns {
                key: format!("{key:?}"),
                a: ca,
                b: cb,
            });
        }
        adjacency[a as usize].push(b);
        adjacency[b as usize].push(a);
    }
    // BFS over conics.
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut queue = vec![start as u32];
        seen[start] = true;
        while let Some(v) = queue.pop() {
            for &w in &adjacency[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push(w);
                }
            }
        }
    }
    Ok(CoefficientGraph {
        distinct_keys: by_key.len(),
        components,
        connected: components == 1,
    })
}

/// How to certify the dimension of the relation space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankMethod {
    /// Exact sparse rational elimination of the tau coefficient matrix.
    ExactRational,
    /// Pair structure plus connectivity of the coefficient graph.
    GraphConnectivity,
}

/// Dimension of `{ x : sum_c x_c tau_c = 0 }`; the expected value is 1.
pub fn relation_space_dim(family: &TauFamily, method: RankMethod) -> Result<usize, HlogError> {
    match method {
        RankMethod::ExactRational => {
            let mut keys: Vec<WedgeKey> = Vec::new();
            for tau in &family.taus {
                keys.extend(tau.iter().map(|(k, _)| *k));
            }
            keys.sort_unstable();
            keys.dedup();
            let col_of: HashMap<WedgeKey, u32> =
                keys.iter().enumerate().map(|(i, k)| (*k, i as u32)).collect();
            let rows = family.taus.iter().map(|tau| {
                tau.iter()
                    .map(|(k, &c)| (col_of[k], ratlin::rat(c)))
                    .collect::<BTreeMap<u32, BigRational>>()
            });
            let rank = ratlin::sparse_rank(rows);
            Ok(family.len() - rank)
        }
        RankMethod::GraphConnectivity => {
            let graph = coefficient_graph(family)?;
            if !graph.connected {
                return Err(HlogError::Disconnected { components: graph.components });
            }
            hlog_sum(family)?;
            // Opposite unit pairs force any relation to be constant along
            // edges; connectivity makes it globally constant, and the
            // vanishing sum shows the constant relation is realized.
            Ok(1)
        }
    }
}
