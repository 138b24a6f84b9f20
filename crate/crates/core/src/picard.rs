//! Picard lattice of the del Pezzo surface `X_r`.
//!
//! `Pic(X_r)` is the free abelian group on the hyperplane class `h` and the
//! exceptional classes `e_1, ..., e_r` of the `r` blown-up points.  The
//! intersection form is diagonal in that basis: `h.h = 1`, `e_i.e_j =
//! -delta_ij`, `h.e_i = 0`.  A class is stored by its coordinates `(d; m_1,
//! ..., m_r)` with respect to the basis `(h, -e_1, ..., -e_r)`, i.e. the
//! represented divisor class is `d*h - sum_i m_i * e_i`.  In these coordinates
//! a plane curve of degree `d` with multiplicity `m_i` at the i-th point has
//! nonnegative entries, and the intersection number is `d*d' - sum_i m_i*m_i'`.
//!
//! The canonical class is `K = -3h + sum_i e_i`; the degree of a curve class
//! `C` is `-K.C`.

use std::fmt;

/// Inclusive range of supported blow-up counts.
pub const R_MIN: usize = 3;
/// Inclusive range of supported blow-up counts.
pub const R_MAX: usize = 8;

/// A divisor class on `X_r` in the coordinates `(d; m_1, ..., m_r)`.
///
/// Ordering is lexicographic on the coordinate vector `(d, m_1, ..., m_r)`;
/// this fixes the global line order used by every other module.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PicClass {
    d: i64,
    m: Vec<i64>,
}

impl PicClass {
    /// Class with coefficient `d` on `h` and `m_i` on `-e_i`.
    pub fn new(d: i64, m: Vec<i64>) -> Self {
        assert!(
            (R_MIN..=R_MAX).contains(&m.len()),
            "unsupported blow-up count r = {}",
            m.len()
        );
        PicClass { d, m }
    }

    /// Class from the full coordinate vector `[d, m_1, ..., m_r]`.
    pub fn from_coords(coords: &[i64]) -> Self {
        assert!(!coords.is_empty());
        PicClass::new(coords[0], coords[1..].to_vec())
    }

    /// The hyperplane class `h`.
    pub fn hyperplane(r: usize) -> Self {
        PicClass::new(1, vec![0; r])
    }

    /// The exceptional class `e_i` (1-based `i`).
    pub fn exceptional(r: usize, i: usize) -> Self {
        assert!((1..=r).contains(&i), "exceptional index {i} out of 1..={r}");
        let mut m = vec![0; r];
        m[i - 1] = -1;
        PicClass::new(0, m)
    }

    /// The canonical class `K = -3h + sum_i e_i`, coordinates `(-3; -1, ..., -1)`.
    pub fn canonical(r: usize) -> Self {
        PicClass::new(-3, vec![-1; r])
    }

    /// Number of blown-up points.
    pub fn r(&self) -> usize {
        self.m.len()
    }

    /// Coefficient of `h`.
    pub fn d(&self) -> i64 {
        self.d
    }

    /// Coefficients of `(-e_1, ..., -e_r)`.
    pub fn m(&self) -> &[i64] {
        &self.m
    }

    /// Full coordinate vector `[d, m_1, ..., m_r]`.
    pub fn coords(&self) -> Vec<i64> {
        let mut v = Vec::with_capacity(self.m.len() + 1);
        v.push(self.d);
        v.extend_from_slice(&self.m);
        v
    }

    /// Intersection number `self . other`.
    ///
    /// Panics if the two classes live on different `X_r` or if the product
    /// overflows 64 bits (the lattice entries in this crate never approach
    /// that, so overflow signals a bug).
    pub fn intersect(&self, other: &PicClass) -> i64 {
        assert_eq!(
            self.r(),
            other.r(),
            "intersection of classes on X_{} and X_{}",
            self.r(),
            other.r()
        );
        let mut acc: i128 = (self.d as i128) * (other.d as i128);
        for (a, b) in self.m.iter().zip(&other.m) {
            acc -= (*a as i128) * (*b as i128);
        }
        i64::try_from(acc).expect("intersection number overflow")
    }

    /// Self-intersection `self . self`.
    pub fn self_intersection(&self) -> i64 {
        self.intersect(self)
    }

    /// Degree `-K . self`.
    pub fn degree(&self) -> i64 {
        -PicClass::canonical(self.r()).intersect(self)
    }

    /// Type symbol `(d; k_1^{n_1}, ...)`: the degree together with the
    /// multiset of nonzero multiplicities.
    pub fn class_type(&self) -> TypeSymbol {
        let mut counts: Vec<(i64, u32)> = Vec::new();
        let mut sorted: Vec<i64> = self.m.iter().copied().filter(|&k| k != 0).collect();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        for k in sorted {
            match counts.last_mut() {
                Some((kk, n)) if *kk == k => *n += 1,
                _ => counts.push((k, 1)),
            }
        }
        TypeSymbol { d: self.d, pairs: counts }
    }

    fn checked_combine(&self, other: &PicClass, sign: i64) -> PicClass {
        assert_eq!(self.r(), other.r(), "combining classes of different r");
        let d = self
            .d
            .checked_add(sign * other.d)
            .expect("coordinate overflow");
        let m = self
            .m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| a.checked_add(sign * b).expect("coordinate overflow"))
            .collect();
        PicClass { d, m }
    }
}

impl std::ops::Add for &PicClass {
    type Output = PicClass;
    fn add(self, rhs: &PicClass) -> PicClass {
        self.checked_combine(rhs, 1)
    }
}

impl std::ops::Sub for &PicClass {
    type Output = PicClass;
    fn sub(self, rhs: &PicClass) -> PicClass {
        self.checked_combine(rhs, -1)
    }
}

impl fmt::Debug for PicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.d)?;
        for (i, k) in self.m.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { " " } else { "," }, k)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for PicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Degree plus multiplicity profile of a class, e.g. `(6; 3, 2^6)`.
///
/// `pairs` lists `(multiplicity, count)` with multiplicities strictly
/// decreasing.  The derived order (degree ascending, then the pair list)
/// reproduces the conventional census row order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeSymbol {
    pub d: i64,
    pub pairs: Vec<(i64, u32)>,
}

impl TypeSymbol {
    /// Compact form `d;k1^n1,k2^n2` with `^1` omitted, e.g. `6;3,2^6`.
    pub fn compact(&self) -> String {
        let mut s = format!("{};", self.d);
        for (i, (k, n)) in self.pairs.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&k.to_string());
            if *n > 1 {
                s.push_str(&format!("^{n}"));
            }
        }
        s
    }

    /// Parses the output of [`TypeSymbol::compact`].
    pub fn parse(s: &str) -> Option<TypeSymbol> {
        let (d, rest) = s.split_once(';')?;
        let d = d.trim().parse().ok()?;
        let mut pairs = Vec::new();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let part = part.trim();
            let (k, n) = match part.split_once('^') {
                Some((k, n)) => (k.parse().ok()?, n.parse().ok()?),
                None => (part.parse().ok()?, 1),
            };
            pairs.push((k, n));
        }
        Some(TypeSymbol { d, pairs })
    }

    /// Number of classes of this type on `X_r`: the multiplicity profile can
    /// be distributed over the `r` points in `r! / (prod n_t! * (r - sum n_t)!)`
    /// ways, and membership of a class among lines or conics depends only on
    /// the type.
    pub fn arrangement_count(&self, r: usize) -> u64 {
        let used: u32 = self.pairs.iter().map(|(_, n)| n).sum();
        if used as usize > r {
            return 0;
        }
        let mut count: u64 = 1;
        let mut remaining = r as u64;
        for (_, n) in &self.pairs {
            count *= binomial(remaining, *n as u64);
            remaining -= *n as u64;
        }
        count
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

impl fmt::Debug for TypeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.compact())
    }
}

impl fmt::Display for TypeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
