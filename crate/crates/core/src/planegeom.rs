//! Exact plane models of conic fibrations.
//!
//! `X_r` is realized as the blow-up of the plane in `r` general points
//! `p_1, ..., p_r`.  A conic class `c` with nonnegative multiplicities is cut
//! out by a two-dimensional space of degree-`d` forms vanishing to the
//! prescribed orders at the `p_i`; the ratio of a basis gives the fibration
//! map as a rational function `N / D` on the plane.  Each reducible fiber is
//! a pair of lines, and the (constant) value of `N / D` along a fiber is one
//! of the `r - 1` singular values of the model.
//!
//! Models are normalized by a Mobius transformation so that the reference
//! fiber (the last one in fiber order) sits over infinity; the remaining
//! finite singular values are kept exact.  Two built-in families with closed
//! formulas are provided: five models on `X_4` (whose weight-2 identity is
//! Abel's five-term relation) and ten models on `X_5` with two rational
//! parameters `(a, b)`.
//!
//! Everything here is exact: points, forms and values are arbitrary-precision
//! rationals.  Conversion to floating point happens only at the very end,
//! when a model is handed to the numeric transport.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::curves::{CurveError, ReducibleFiber, SurfaceData};
use crate::picard::PicClass;
use crate::ratlin::RatMat;

pub type Q = BigRational;

pub fn q_i64(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_ratio(p: i64, q: i64) -> Q {
    assert!(q != 0);
    Q::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Error)]
pub enum GeomError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("degenerate point configuration: {0}")]
    Degenerate(String),
    #[error("class {0} has no plane model (negative multiplicity or degree < 1)")]
    UnsupportedClass(String),
    #[error("linear system of {class} has dimension {got}, expected {expected}")]
    UnexpectedSystemDimension { class: String, expected: usize, got: usize },
    #[error("evaluation at a base point (numerator and denominator both vanish)")]
    BasePoint,
    #[error("could not parametrize the curve: {0}")]
    ParametrizationFailed(String),
    #[error("fiber of {label}: the two components give different values")]
    FiberValueMismatch { label: String },
    #[error("model {label}: value is not constant along a fiber component")]
    NonConstantOnFiber { label: String },
    #[error("model {label}: singular values are not pairwise distinct")]
    ValueCollision { label: String },
    #[error("formula {label} matches {got} conic classes, expected exactly 1")]
    MatchFailure { label: String, got: usize },
    #[error("formula {label}: singular set differs from the expected normalized set")]
    WrongSingularSet { label: String },
    #[error("could not find a valid sample after {0} attempts")]
    SamplingExhausted(usize),
}

// ---------------------------------------------------------------------------
// Homogeneous forms and univariate polynomials
// ---------------------------------------------------------------------------

/// Exponent triples `(a, b, c)` with `a + b + c = d`, in a fixed order
/// (lexicographic, descending in `(a, b)`).
pub fn monomials(degree: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
    for a in (0..=degree).rev() {
        for b in (0..=degree - a).rev() {
            out.push((a, b, degree - a - b));
        }
    }
    out
}

/// Homogeneous trivariate form over the rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Form {
    degree: usize,
    coeffs: Vec<Q>,
}

impl Form {
    pub fn new(degree: usize, coeffs: Vec<Q>) -> Self {
        assert_eq!(coeffs.len(), (degree + 1) * (degree + 2) / 2);
        Form { degree, coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Form::new(degree, vec![Q::zero(); (degree + 1) * (degree + 2) / 2])
    }

    /// Degree-1 form `a X + b Y + c Z`.
    pub fn linear(a: Q, b: Q, c: Q) -> Self {
        Form::new(1, vec![a, b, c])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Q::is_zero)
    }

    pub fn eval(&self, p: &[Q; 3]) -> Q {
        let mut acc = Q::zero();
        for ((a, b, c), coeff) in monomials(self.degree).into_iter().zip(&self.coeffs) {
            if coeff.is_zero() {
                continue;
            }
            acc += coeff * pow_q(&p[0], a) * pow_q(&p[1], b) * pow_q(&p[2], c);
        }
        acc
    }

    /// Partial derivative in variable `var` (0 = X, 1 = Y, 2 = Z).
    pub fn partial(&self, var: usize) -> Form {
        assert!(self.degree >= 1);
        let mut out = Form::zero(self.degree - 1);
        let lower = monomials(self.degree - 1);
        for ((a, b, c), coeff) in monomials(self.degree).into_iter().zip(&self.coeffs) {
            if coeff.is_zero() {
                continue;
            }
            let mut e = [a, b, c];
            if e[var] == 0 {
                continue;
            }
            let scale = q_i64(e[var] as i64);
            e[var] -= 1;
            let pos = lower
                .iter()
                .position(|&m| m == (e[0], e[1], e[2]))
                .expect("derivative monomial exists");
            out.coeffs[pos] += coeff * scale;
        }
        out
    }

    pub fn mul(&self, other: &Form) -> Form {
        let degree = self.degree + other.degree;
        let mut out = Form::zero(degree);
        let target = monomials(degree);
        for ((a1, b1, c1), co1) in monomials(self.degree).into_iter().zip(&self.coeffs) {
            if co1.is_zero() {
                continue;
            }
            for ((a2, b2, c2), co2) in monomials(other.degree).into_iter().zip(&other.coeffs) {
                if co2.is_zero() {
                    continue;
                }
                let m = (a1 + a2, b1 + b2, c1 + c2);
                let pos = target.iter().position(|&t| t == m).unwrap();
                out.coeffs[pos] += co1 * co2;
            }
        }
        out
    }

    pub fn scaled(&self, s: &Q) -> Form {
        Form::new(self.degree, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, other: &Form) -> Form {
        assert_eq!(self.degree, other.degree);
        Form::new(
            self.degree,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        )
    }

    /// Divides by the first nonzero coefficient, making it 1.
    pub fn normalized(&self) -> Form {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            Some(lead) => {
                let inv = lead.recip();
                self.scaled(&inv)
            }
            None => self.clone(),
        }
    }

    /// Substitutes parametrized coordinates, producing a univariate
    /// polynomial in the parameter.
    pub fn compose(&self, param: &CurveParam) -> UniPoly {
        let d = self.degree;
        let powers = |p: &UniPoly| -> Vec<UniPoly> {
            let mut v = vec![UniPoly::one()];
            for _ in 0..d {
                v.push(v.last().unwrap().mul(p));
            }
            v
        };
        let (px, py, pz) = (powers(&param.x), powers(&param.y), powers(&param.z));
        let mut acc = UniPoly::zero();
        for ((a, b, c), coeff) in monomials(d).into_iter().zip(&self.coeffs) {
            if coeff.is_zero() {
                continue;
            }
            let term = px[a].mul(&py[b]).mul(&pz[c]).scaled(coeff);
            acc = acc.add(&term);
        }
        acc
    }

    /// Coefficients as f64 after joint normalization (shared with a partner
    /// form so that the ratio of the two is preserved exactly).
    fn to_f64_with_scale(&self, scale: &Q) -> Vec<((usize, usize, usize), f64)> {
        monomials(self.degree)
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| {
                let v = (c * scale).to_f64().expect("rational fits in f64");
                (m, v)
            })
            .collect()
    }
}

impl std::fmt::Debug for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vars = ["X", "Y", "Z"];
        let mut first = true;
        for ((a, b, c), coeff) in monomials(self.degree).into_iter().zip(&self.coeffs) {
            if coeff.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({coeff})")?;
            for (var, e) in vars.iter().zip([a, b, c]) {
                if e > 0 {
                    write!(f, "*{var}^{e}")?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn pow_q(x: &Q, n: usize) -> Q {
    let mut acc = Q::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Dense univariate polynomial over the rationals, ascending coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly {
    pub coeffs: Vec<Q>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        UniPoly { coeffs: vec![Q::one()] }
    }

    pub fn from_coeffs(coeffs: Vec<Q>) -> Self {
        let mut p = UniPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Q::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Q::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        UniPoly::from_coeffs(coeffs)
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(coeffs)
    }

    pub fn scaled(&self, s: &Q) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * q_i64(i as i64 + 1))
                .collect(),
        )
    }

    pub fn eval(&self, t: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn leading(&self) -> Option<&Q> {
        self.coeffs.last()
    }
}

// ---------------------------------------------------------------------------
// Projective values
// ---------------------------------------------------------------------------

/// Exact value of a pencil: a rational number or infinity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PencilValue {
    Finite(Q),
    Infinity,
}

impl PencilValue {
    /// From a projective pair `[n : d]`; both zero is a base-point error.
    pub fn from_pair(n: Q, d: Q) -> Result<PencilValue, GeomError> {
        if d.is_zero() {
            if n.is_zero() {
                return Err(GeomError::BasePoint);
            }
            Ok(PencilValue::Infinity)
        } else {
            Ok(PencilValue::Finite(n / d))
        }
    }

    pub fn as_finite(&self) -> Option<&Q> {
        match self {
            PencilValue::Finite(q) => Some(q),
            PencilValue::Infinity => None,
        }
    }

    pub fn to_complex(&self) -> Option<Complex64> {
        self.as_finite().map(|q| Complex64::new(q.to_f64().expect("fits f64"), 0.0))
    }
}

impl std::fmt::Debug for PencilValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PencilValue::Finite(q) => write!(f, "{q}"),
            PencilValue::Infinity => write!(f, "inf"),
        }
    }
}

impl std::fmt::Display for PencilValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

fn proj_eq(a: &[Q; 3], b: &[Q; 3]) -> bool {
    // a x b = 0
    (&a[1] * &b[2] - &a[2] * &b[1]).is_zero()
        && (&a[2] * &b[0] - &a[0] * &b[2]).is_zero()
        && (&a[0] * &b[1] - &a[1] * &b[0]).is_zero()
}

fn det3(rows: [&[Q; 3]; 3]) -> Q {
    let m = |i: usize, j: usize| &rows[i][j];
    m(0, 0) * &(m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
        - m(0, 1) * &(m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * &(m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

// ---------------------------------------------------------------------------
// Point configurations
// ---------------------------------------------------------------------------

/// `r` projective rational points in general position.
#[derive(Clone, Debug)]
pub struct PointConfig {
    pub points: Vec<[Q; 3]>,
}

impl PointConfig {
    /// The four standard points `[1:0:0], [0:1:0], [0:0:1], [1:1:1]`,
    /// truncated to `n`, followed by affine extras `[x : y : 1]`.
    pub fn standard_with(n_standard: usize, extras: &[(Q, Q)]) -> PointConfig {
        assert!(n_standard <= 4);
        let std4 = [
            [Q::one(), Q::zero(), Q::zero()],
            [Q::zero(), Q::one(), Q::zero()],
            [Q::zero(), Q::zero(), Q::one()],
            [Q::one(), Q::one(), Q::one()],
        ];
        let mut points: Vec<[Q; 3]> = std4[..n_standard].to_vec();
        for (x, y) in extras {
            points.push([x.clone(), y.clone(), Q::one()]);
        }
        PointConfig { points }
    }

    pub fn r(&self) -> usize {
        self.points.len()
    }

    /// Checks pairwise distinctness, no 3 collinear, no 6 on a conic, and
    /// (for r = 8) no cubic through all points singular at one of them.
    pub fn validate_general_position(&self) -> Result<(), GeomError> {
        let n = self.points.len();
        for i in 0..n {
            if self.points[i].iter().all(Q::is_zero) {
                return Err(GeomError::Degenerate(format!("point {} is zero", i + 1)));
            }
            for j in i + 1..n {
                if proj_eq(&self.points[i], &self.points[j]) {
                    return Err(GeomError::Degenerate(format!(
                        "points {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if det3([&self.points[i], &self.points[j], &self.points[k]]).is_zero() {
                        return Err(GeomError::Degenerate(format!(
                            "points {}, {}, {} are collinear",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        if n >= 6 {
            let quadric_row = |p: &[Q; 3]| -> Vec<Q> {
                monomials(2)
                    .into_iter()
                    .map(|(a, b, c)| pow_q(&p[0], a) * pow_q(&p[1], b) * pow_q(&p[2], c))
                    .collect()
            };
            let idx: Vec<usize> = (0..n).collect();
            for subset in k_subsets(&idx, 6) {
                let rows: Vec<Vec<Q>> =
                    subset.iter().map(|&i| quadric_row(&self.points[i])).collect();
                if RatMat::new(rows, 6).rank() < 6 {
                    return Err(GeomError::Degenerate(format!(
                        "points {:?} lie on a common conic",
                        subset.iter().map(|i| i + 1).collect::<Vec<_>>()
                    )));
                }
            }
        }
        if n == 8 {
            for i in 0..n {
                let mut rows: Vec<Vec<Q>> = Vec::new();
                let cubic_row = |p: &[Q; 3]| -> Vec<Q> {
                    monomials(3)
                        .into_iter()
                        .map(|(a, b, c)| pow_q(&p[0], a) * pow_q(&p[1], b) * pow_q(&p[2], c))
                        .collect()
                };
                for j in 0..n {
                    if j != i {
                        rows.push(cubic_row(&self.points[j]));
                    }
                }
                // Vanishing of all three first partials at p_i makes the
                // cubic singular there (the value vanishes by Euler).
                for var in 0..3 {
                    let row: Vec<Q> = monomials(3)
                        .into_iter()
                        .map(|(a, b, c)| {
                            let mut e = [a, b, c];
                            if e[var] == 0 {
                                return Q::zero();
                            }
                            let scale = q_i64(e[var] as i64);
                            e[var] -= 1;
                            scale
                                * pow_q(&self.points[i][0], e[0])
                                * pow_q(&self.points[i][1], e[1])
                                * pow_q(&self.points[i][2], e[2])
                        })
                        .collect();
                    rows.push(row);
                }
                if RatMat::new(rows, 10).rank() < 10 {
                    return Err(GeomError::Degenerate(format!(
                        "a cubic through all points is singular at point {}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

fn k_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..items.len() {
            current.push(items[i]);
            rec(items, k, i + 1, current, out);
            current.pop();
        }
    }
    rec(items, k, 0, &mut current, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Linear systems and curve parametrizations
// ---------------------------------------------------------------------------

/// Basis of degree-`d(c)` forms vanishing to order `m_i(c)` at every `p_i`.
///
/// Classes with negative multiplicities or degree below 1 (for instance the
/// exceptional classes themselves) have no plane model and are rejected.
pub fn linear_system(c: &PicClass, cfg: &PointConfig) -> Result<Vec<Form>, GeomError> {
    let d = c.d();
    if d < 1 || c.m().iter().any(|&m| m < 0) {
        return Err(GeomError::UnsupportedClass(c.to_string()));
    }
    assert_eq!(c.r(), cfg.r(), "class and configuration sizes differ");
    let d = d as usize;
    let mons = monomials(d);
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for (p, &mult) in cfg.points.iter().zip(c.m()) {
        // All partial derivatives of order < mult vanish at p.
        for order in 0..mult as usize {
            for a1 in (0..=order).rev() {
                for a2 in (0..=order - a1).rev() {
                    let alpha = [a1, a2, order - a1 - a2];
                    let row: Vec<Q> = mons
                        .iter()
                        .map(|&(e1, e2, e3)| {
                            let e = [e1, e2, e3];
                            let mut coeff = Q::one();
                            for v in 0..3 {
                                if e[v] < alpha[v] {
                                    return Q::zero();
                                }
                                for f in (e[v] - alpha[v] + 1)..=e[v] {
                                    coeff *= q_i64(f as i64);
                                }
                            }
                            for v in 0..3 {
                                coeff *= pow_q(&p[v], e[v] - alpha[v]);
                            }
                            coeff
                        })
                        .collect();
                    rows.push(row);
                }
            }
        }
    }
    let ncols = mons.len();
    let basis = RatMat::new(rows, ncols).nullspace();
    Ok(basis.into_iter().map(|coeffs| Form::new(d, coeffs).normalized()).collect())
}

/// The unique plane curve of a line class with nonnegative multiplicities.
pub fn line_curve(l: &PicClass, cfg: &PointConfig) -> Result<Form, GeomError> {
    let basis = linear_system(l, cfg)?;
    if basis.len() != 1 {
        return Err(GeomError::UnexpectedSystemDimension {
            class: l.to_string(),
            expected: 1,
            got: basis.len(),
        });
    }
    Ok(basis.into_iter().next().unwrap())
}

/// Rational parametrization `t -> [x(t) : y(t) : z(t)]` of a degree-1 or
/// degree-2 plane curve.
#[derive(Clone, Debug)]
pub struct CurveParam {
    pub x: UniPoly,
    pub y: UniPoly,
    pub z: UniPoly,
}

impl CurveParam {
    pub fn at(&self, t: &Q) -> [Q; 3] {
        [self.x.eval(t), self.y.eval(t), self.z.eval(t)]
    }
}

fn aux_points() -> Vec<[Q; 3]> {
    [
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
        [1, 1, 1],
        [1, -1, 2],
        [2, 3, 5],
        [5, -2, 3],
        [3, 7, -1],
    ]
    .into_iter()
    .map(|[a, b, c]| [q_i64(a), q_i64(b), q_i64(c)])
    .collect()
}

/// Parametrizes a line or a smooth conic passing through `base` (required
/// only in the degree-2 case, where lines through the base point sweep the
/// conic).
pub fn parametrize_curve(form: &Form, base: Option<&[Q; 3]>) -> Result<CurveParam, GeomError> {
    match form.degree() {
        1 => {
            let a = &form.coeffs()[0];
            let b = &form.coeffs()[1];
            let c = &form.coeffs()[2];
            // Two independent points on aX + bY + cZ = 0.
            let (p0, p1): ([Q; 3], [Q; 3]) = if !a.is_zero() {
                ([-b.clone(), a.clone(), Q::zero()], [-c.clone(), Q::zero(), a.clone()])
            } else if !b.is_zero() {
                ([Q::one(), Q::zero(), Q::zero()], [Q::zero(), -c.clone(), b.clone()])
            } else if !c.is_zero() {
                ([Q::one(), Q::zero(), Q::zero()], [Q::zero(), Q::one(), Q::zero()])
            } else {
                return Err(GeomError::ParametrizationFailed("zero linear form".into()));
            };
            Ok(CurveParam {
                x: UniPoly::from_coeffs(vec![p0[0].clone(), p1[0].clone()]),
                y: UniPoly::from_coeffs(vec![p0[1].clone(), p1[1].clone()]),
                z: UniPoly::from_coeffs(vec![p0[2].clone(), p1[2].clone()]),
            })
        }
        2 => {
            let p = base.ok_or_else(|| {
                GeomError::ParametrizationFailed("conic needs a base point".into())
            })?;
            if !form.eval(p).is_zero() {
                return Err(GeomError::ParametrizationFailed(
                    "base point does not lie on the conic".into(),
                ));
            }
            let grad: Vec<Form> = (0..3).map(|v| form.partial(v)).collect();
            let grad_at = |point: &[Q; 3]| -> [Q; 3] {
                [grad[0].eval(point), grad[1].eval(point), grad[2].eval(point)]
            };
            let gp = grad_at(p);
            if gp.iter().all(Q::is_zero) {
                return Err(GeomError::ParametrizationFailed(
                    "conic is singular at the base point".into(),
                ));
            }
            // Pick two auxiliary points spanning a line not through p.
            let aux = aux_points();
            let mut pair = None;
            'outer: for i in 0..aux.len() {
                for j in i + 1..aux.len() {
                    if !det3([p, &aux[i], &aux[j]]).is_zero() {
                        pair = Some((aux[i].clone(), aux[j].clone()));
                        break 'outer;
                    }
                }
            }
            let (q0, q1) = pair.ok_or_else(|| {
                GeomError::ParametrizationFailed("no auxiliary frame".into())
            })?;
            // q(t) = q0 + t q1; the second intersection of the line p q(t)
            // with the conic is F(q) p - (grad F(p) . q) q.
            let qt: [UniPoly; 3] = std::array::from_fn(|v| {
                UniPoly::from_coeffs(vec![q0[v].clone(), q1[v].clone()])
            });
            let f_of_q = form.compose(&CurveParam {
                x: qt[0].clone(),
                y: qt[1].clone(),
                z: qt[2].clone(),
            });
            let b_of_q = {
                // grad F(p) . q(t), linear in t
                let mut acc = UniPoly::zero();
                for v in 0..3 {
                    acc = acc.add(&qt[v].scaled(&gp[v]));
                }
                acc
            };
            let component = |v: usize| -> UniPoly {
                let first = f_of_q.scaled(&p[v]);
                let second = b_of_q.mul(&qt[v]);
                first.add(&second.scaled(&q_i64(-1)))
            };
            Ok(CurveParam { x: component(0), y: component(1), z: component(2) })
        }
        d => Err(GeomError::ParametrizationFailed(format!(
            "unsupported curve degree {d}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Fibration models
// ---------------------------------------------------------------------------

/// An exact plane model of one conic fibration.
#[derive(Clone, Debug)]
pub struct FibrationModel {
    pub class_index: usize,
    pub class: PicClass,
    pub label: String,
    pub num: Form,
    pub den: Form,
    /// Reducible fibers aligned with `singular_values`.
    pub fiber_order: Vec<ReducibleFiber>,
    /// Exact singular values; in normalized models the last one is infinity.
    pub singular_values: Vec<PencilValue>,
}

impl FibrationModel {
    /// Exact value at an affine rational point `[x : y : 1]`.
    pub fn value_at(&self, x: &Q, y: &Q) -> Result<PencilValue, GeomError> {
        let p = [x.clone(), y.clone(), Q::one()];
        PencilValue::from_pair(self.num.eval(&p), self.den.eval(&p))
    }

    /// Finite singular values as complex numbers, in fiber order.
    pub fn finite_singular_values(&self) -> Vec<Complex64> {
        self.singular_values
            .iter()
            .filter_map(PencilValue::to_complex)
            .collect()
    }

    /// Floating-point view of the model for the numeric transport.  The two
    /// forms are scaled by a common rational factor before conversion, so the
    /// ratio is preserved.
    pub fn to_numeric(&self) -> NumericFibration {
        let max_abs = self
            .num
            .coeffs()
            .iter()
            .chain(self.den.coeffs())
            .map(Signed::abs)
            .max()
            .expect("nonzero model");
        let scale = if max_abs.is_zero() { Q::one() } else { max_abs.recip() };
        NumericFibration {
            label: self.label.clone(),
            class_index: self.class_index,
            num: self.num.to_f64_with_scale(&scale),
            den: self.den.to_f64_with_scale(&scale),
            finite_singular_values: self.finite_singular_values(),
        }
    }
}

/// Floating-point evaluation view of a model.
#[derive(Clone, Debug)]
pub struct NumericFibration {
    pub label: String,
    pub class_index: usize,
    num: Vec<((usize, usize, usize), f64)>,
    den: Vec<((usize, usize, usize), f64)>,
    pub finite_singular_values: Vec<Complex64>,
}

impl NumericFibration {
    /// Value at the affine complex point `[x : y : 1]`, as `(num, den)`.
    pub fn value_pair(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let eval = |terms: &[((usize, usize, usize), f64)]| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for &((a, b, _c), coeff) in terms {
                acc += coeff * x.powu(a as u32) * y.powu(b as u32);
            }
            acc
        };
        (eval(&self.num), eval(&self.den))
    }

    pub fn value(&self, x: Complex64, y: Complex64) -> Complex64 {
        let (n, d) = self.value_pair(x, y);
        n / d
    }
}

/// Exact value of `num/den` along one reducible fiber, evaluated through
/// every component that has a plane realization.
///
/// Components that are exceptional classes `e_i` contribute the direct value
/// at `p_i` (never a base point, because `m_i = 0` for such fibers); the
/// other components are parametrized curves along which the value must be
/// exactly constant.
fn fiber_value(
    num: &Form,
    den: &Form,
    fiber: &ReducibleFiber,
    data: &SurfaceData,
    cfg: &PointConfig,
    label: &str,
) -> Result<PencilValue, GeomError> {
    let mut values: Vec<PencilValue> = Vec::new();
    for line_idx in [fiber.a, fiber.b] {
        let class = data.lines.class(line_idx as usize);
        if class.d() == 0 {
            // e_i: the blown-down point.
            let i = class
                .m()
                .iter()
                .position(|&m| m == -1)
                .expect("degree-0 line is an exceptional class");
            let p = &cfg.points[i];
            values.push(PencilValue::from_pair(num.eval(p), den.eval(p))?);
            continue;
        }
        let curve = line_curve(class, cfg)?;
        let base = if curve.degree() == 2 {
            // Any configuration point with multiplicity 1 on the class lies
            // on the conic and serves as the sweep center.
            let i = class
                .m()
                .iter()
                .position(|&m| m == 1)
                .ok_or_else(|| GeomError::ParametrizationFailed(
                    "conic component without a marked point".into(),
                ))?;
            Some(&cfg.points[i])
        } else {
            None
        };
        let param = parametrize_curve(&curve, base)?;
        let n_t = num.compose(&param);
        let d_t = den.compose(&param);
        // Constancy of n/d along the curve: the Wronskian vanishes.
        let wronskian = n_t.mul(&d_t.derivative()).add(
            &d_t.mul(&n_t.derivative()).scaled(&q_i64(-1)),
        );
        if !wronskian.is_zero() {
            return Err(GeomError::NonConstantOnFiber { label: label.to_string() });
        }
        let value = if n_t.is_zero() && d_t.is_zero() {
            return Err(GeomError::BasePoint);
        } else if n_t.is_zero() {
            PencilValue::Finite(Q::zero())
        } else if d_t.is_zero() {
            PencilValue::Infinity
        } else {
            // Proportional polynomials: the ratio of leading coefficients.
            if n_t.coeffs.len() != d_t.coeffs.len() {
                return Err(GeomError::NonConstantOnFiber { label: label.to_string() });
            }
            PencilValue::Finite(n_t.leading().unwrap() / d_t.leading().unwrap())
        };
        values.push(value);
    }
    if values.len() == 2 && values[0] != values[1] {
        return Err(GeomError::FiberValueMismatch { label: label.to_string() });
    }
    Ok(values.into_iter().next().expect("fiber has components"))
}

/// Values of all fibers of conic `ci` under `num/den`, in canonical fiber
/// order, with a distinctness check.
fn fiber_values(
    num: &Form,
    den: &Form,
    ci: usize,
    data: &SurfaceData,
    cfg: &PointConfig,
    label: &str,
) -> Result<Vec<PencilValue>, GeomError> {
    let fibers = data.conic_fibers(ci);
    let mut values = Vec::with_capacity(fibers.len());
    for fiber in fibers {
        values.push(fiber_value(num, den, fiber, data, cfg, label)?);
    }
    let mut sorted = values.clone();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(GeomError::ValueCollision { label: label.to_string() });
    }
    Ok(values)
}

/// Mobius-normalizes `(num, den)` so that the value `reference` goes to
/// infinity; other values move accordingly but stay exact.
fn send_to_infinity(num: &Form, den: &Form, reference: &PencilValue) -> (Form, Form) {
    match reference {
        PencilValue::Infinity => (num.clone(), den.clone()),
        PencilValue::Finite(v) => {
            let p = Q::from_integer(v.numer().clone());
            let q = Q::from_integer(v.denom().clone());
            if p.is_zero() {
                // z -> 1/(q z): [n : d] -> [d : q n]
                (den.clone(), num.scaled(&q))
            } else {
                // z -> z/(q z - p): [n : d] -> [n : q n - p d]
                (num.clone(), num.scaled(&q).sub(&den.scaled(&p)))
            }
        }
    }
}

/// Builds the normalized pencil model of conic class `ci` on `cfg`.
///
/// The two-dimensional linear system provides the map; the reference fiber
/// (canonically the last one) is sent to infinity, the two smallest finite
/// values are mapped to 0 and 1 (the affine freedom costs nothing: value
/// cross-ratios are Mobius invariants, and without this step the raw
/// null-space basis can leave all values clustered at an arbitrary tiny
/// scale), and the fibers are ordered by ascending finite value.
pub fn pencil_model(
    data: &SurfaceData,
    cfg: &PointConfig,
    ci: usize,
) -> Result<FibrationModel, GeomError> {
    let class = data.conics.class(ci).clone();
    let label = format!("pencil[{}]", class.class_type().compact());
    let basis = linear_system(&class, cfg)?;
    if basis.len() != 2 {
        return Err(GeomError::UnexpectedSystemDimension {
            class: class.to_string(),
            expected: 2,
            got: basis.len(),
        });
    }
    let (num0, den0) = (basis[0].clone(), basis[1].clone());
    let values0 = fiber_values(&num0, &den0, ci, data, cfg, &label)?;
    let reference = values0.last().expect("conic has fibers").clone();
    let (num1, den1) = send_to_infinity(&num0, &den0, &reference);
    let values1 = fiber_values(&num1, &den1, ci, data, cfg, &label)?;
    let mut finite: Vec<Q> = values1
        .iter()
        .filter_map(|v| v.as_finite().cloned())
        .collect();
    finite.sort();
    let shift = finite[0].clone();
    let scale = if finite.len() >= 2 { &finite[1] - &shift } else { Q::one() };
    let num = num1.sub(&den1.scaled(&shift));
    let den = den1.scaled(&scale);
    let values = fiber_values(&num, &den, ci, data, cfg, &label)?;

    let fibers = data.conic_fibers(ci);
    let mut order: Vec<usize> = (0..fibers.len()).collect();
    order.sort_by(|&a, &b| values[a].cmp(&values[b]));
    debug_assert!(matches!(values[order[fibers.len() - 1]], PencilValue::Infinity));

    Ok(FibrationModel {
        class_index: ci,
        class,
        label,
        num,
        den,
        fiber_order: order.iter().map(|&k| fibers[k]).collect(),
        singular_values: order.iter().map(|&k| values[k].clone()).collect(),
    })
}

/// Normalized pencil models for every conic class of the surface.
pub fn pencil_models(
    data: &SurfaceData,
    cfg: &PointConfig,
) -> Result<Vec<FibrationModel>, GeomError> {
    cfg.validate_general_position()?;
    (0..data.conics.len()).map(|ci| pencil_model(data, cfg, ci)).collect()
}

// ---------------------------------------------------------------------------
// Built-in closed-form model families
// ---------------------------------------------------------------------------

/// Matches a closed-form pair `(num, den)` against all conic classes: the
/// value must be constant on every fiber of exactly one class.
fn match_conic_class(
    num: &Form,
    den: &Form,
    data: &SurfaceData,
    cfg: &PointConfig,
    label: &str,
) -> Result<(usize, Vec<PencilValue>), GeomError> {
    let mut hits = Vec::new();
    for ci in 0..data.conics.len() {
        match fiber_values(num, den, ci, data, cfg, label) {
            Ok(values) => hits.push((ci, values)),
            Err(_) => continue,
        }
    }
    match hits.len() {
        1 => Ok(hits.into_iter().next().unwrap()),
        got => Err(GeomError::MatchFailure { label: label.to_string(), got }),
    }
}

/// Orders the fibers of a matched model along a prescribed value sequence.
fn order_by_values(
    ci: usize,
    class: PicClass,
    label: &str,
    num: Form,
    den: Form,
    values: Vec<PencilValue>,
    expected_order: &[PencilValue],
    data: &SurfaceData,
) -> Result<FibrationModel, GeomError> {
    let fibers = data.conic_fibers(ci);
    let mut fiber_order = Vec::with_capacity(fibers.len());
    let mut singular_values = Vec::with_capacity(fibers.len());
    for want in expected_order {
        let Some(pos) = values.iter().position(|v| v == want) else {
            return Err(GeomError::WrongSingularSet { label: label.to_string() });
        };
        fiber_order.push(fibers[pos]);
        singular_values.push(values[pos].clone());
    }
    if fiber_order.len() != fibers.len() {
        return Err(GeomError::WrongSingularSet { label: label.to_string() });
    }
    Ok(FibrationModel {
        class_index: ci,
        class,
        label: label.to_string(),
        num,
        den,
        fiber_order,
        singular_values,
    })
}

/// The five built-in fibrations of `X_4` over the standard four points:
///
/// ```text
/// U_1 = x,   U_2 = y,   U_3 = x/y,   U_4 = (1-y)/(1-x),
/// U_5 = x(1-y) / (y(1-x)),
/// ```
///
/// each with singular values `(0, 1, infinity)`.  The weight-2 identity over
/// these models is Abel's five-term relation for the Rogers dilogarithm.
pub fn builtin_x4(data: &SurfaceData) -> Result<(PointConfig, Vec<FibrationModel>), GeomError> {
    assert_eq!(data.r, 4);
    let cfg = PointConfig::standard_with(4, &[]);
    cfg.validate_general_position()?;
    let x = Form::linear(Q::one(), Q::zero(), Q::zero());
    let y = Form::linear(Q::zero(), Q::one(), Q::zero());
    let z = Form::linear(Q::zero(), Q::zero(), Q::one());
    let z_minus_y = z.sub(&y);
    let z_minus_x = z.sub(&x);
    let formulas: Vec<(&str, Form, Form)> = vec![
        ("U1", x.clone(), z.clone()),
        ("U2", y.clone(), z.clone()),
        ("U3", x.clone(), y.clone()),
        ("U4", z_minus_y.clone(), z_minus_x.clone()),
        ("U5", x.mul(&z_minus_y), y.mul(&z_minus_x)),
    ];
    let expected = [
        PencilValue::Finite(Q::zero()),
        PencilValue::Finite(Q::one()),
        PencilValue::Infinity,
    ];
    let mut models = Vec::new();
    for (label, num, den) in formulas {
        let (ci, values) = match_conic_class(&num, &den, data, &cfg, label)?;
        models.push(order_by_values(
            ci,
            data.conics.class(ci).clone(),
            label,
            num,
            den,
            values,
            &expected,
            data,
        )?);
    }
    Ok((cfg, models))
}

/// Expected finite third singular values `r_1, ..., r_10` of the built-in
/// `X_5` models, as rational functions of the parameters.
pub fn x5_expected_ratios(a: &Q, b: &Q) -> Vec<Q> {
    let one = Q::one();
    vec![
        a.clone(),                                     // r_1
        b.recip(),                                     // r_2
        b / a,                                         // r_3
        (a - b) / (a - &one),                          // r_4
        b * (a - &one) / (a - b),                      // r_5
        (b - a) / b,                                   // r_6
        (&one - a).recip(),                            // r_7
        &one - b,                                      // r_8
        (&one - a) / (&one - b),                       // r_9
        a * (b - &one) / (b * (a - &one)),             // r_10
    ]
}

/// Validity of the `X_5` parameter pair: `a b (a-1)(b-1)(a-b) != 0`.
pub fn x5_parameters_valid(a: &Q, b: &Q) -> bool {
    let one = Q::one();
    !a.is_zero()
        && !b.is_zero()
        && *a != one
        && *b != one
        && a != b
}

/// The ten built-in fibrations of `X_5` over the standard four points plus
/// `p_5 = [a : b : 1]`, with singular values `(0, 1, r_i, infinity)`.
pub fn builtin_x5(
    data: &SurfaceData,
    a: &Q,
    b: &Q,
) -> Result<(PointConfig, Vec<FibrationModel>), GeomError> {
    assert_eq!(data.r, 5);
    if !x5_parameters_valid(a, b) {
        return Err(GeomError::Degenerate(format!(
            "parameters a = {a}, b = {b} violate a b (a-1)(b-1)(a-b) != 0"
        )));
    }
    let cfg = PointConfig::standard_with(4, &[(a.clone(), b.clone())]);
    cfg.validate_general_position()?;

    let one = Q::one();
    let x = Form::linear(one.clone(), Q::zero(), Q::zero());
    let y = Form::linear(Q::zero(), one.clone(), Q::zero());
    let z = Form::linear(Q::zero(), Q::zero(), one.clone());
    // P = (1-b) x - (1-a) y - (a-b) z, the line through p_4 and p_5.
    let p_form = Form::linear(&one - b, a - &one, b - a);
    let x_minus_y = x.sub(&y);
    let x_minus_z = x.sub(&z);
    let y_minus_z = y.sub(&z);
    let x_minus_az = x.sub(&z.scaled(a));
    let y_minus_bz = y.sub(&z.scaled(b));

    let formulas: Vec<(&str, Form, Form)> = vec![
        ("U1", x.clone(), z.clone()),
        ("U2", z.clone(), y.clone()),
        ("U3", y.clone(), x.clone()),
        ("U4", x_minus_y.clone(), x_minus_z.clone()),
        ("U5", x_minus_az.scaled(&-b.clone()), y.scaled(a).sub(&x.scaled(b))),
        ("U6", p_form.mul(&z), x_minus_z.mul(&y_minus_bz)),
        ("U7", x_minus_y.mul(&y_minus_bz), y.mul(&p_form)),
        ("U8", x.mul(&p_form), x_minus_y.mul(&x_minus_az)),
        ("U9", y.mul(&x_minus_az), x.mul(&y_minus_bz)),
        ("U10", x.mul(&y_minus_z), y.mul(&x_minus_z)),
    ];
    let ratios = x5_expected_ratios(a, b);
    let mut models = Vec::new();
    for ((label, num, den), r_i) in formulas.into_iter().zip(ratios) {
        let (ci, values) = match_conic_class(&num, &den, data, &cfg, label)?;
        let expected = [
            PencilValue::Finite(Q::zero()),
            PencilValue::Finite(Q::one()),
            PencilValue::Finite(r_i),
            PencilValue::Infinity,
        ];
        models.push(order_by_values(
            ci,
            data.conics.class(ci).clone(),
            label,
            num,
            den,
            values,
            &expected,
            data,
        )?);
    }
    Ok((cfg, models))
}

/// Default `X_5` parameters.
pub fn x5_default_parameters() -> (Q, Q) {
    (q_i64(3), q_i64(5))
}

/// Default affine base point for the `X_4` identity, kept away from all lines.
pub fn x4_default_base() -> (Q, Q) {
    (q_ratio(3, 10), q_ratio(3, 5))
}

// ---------------------------------------------------------------------------
// Seeded sampling of configurations and base points
// ---------------------------------------------------------------------------

fn random_q<R: rand::Rng>(rng: &mut R) -> Q {
    let num = rng.random_range(-24i64..=24);
    let den = rng.random_range(1i64..=8);
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Random valid `X_5` parameter pair.
pub fn random_x5_parameters<R: rand::Rng>(rng: &mut R) -> Result<(Q, Q), GeomError> {
    const MAX_ATTEMPTS: usize = 1000;
    for _ in 0..MAX_ATTEMPTS {
        let a = random_q(rng);
        let b = random_q(rng);
        if !x5_parameters_valid(&a, &b) {
            continue;
        }
        let cfg = PointConfig::standard_with(4, &[(a.clone(), b.clone())]);
        if cfg.validate_general_position().is_ok() {
            return Ok((a, b));
        }
    }
    Err(GeomError::SamplingExhausted(MAX_ATTEMPTS))
}

/// Random point configuration for `X_r`, `r <= 6`: the standard points plus
/// random affine rational extras, retried until in general position.
pub fn random_config<R: rand::Rng>(r: usize, rng: &mut R) -> Result<PointConfig, GeomError> {
    const MAX_ATTEMPTS: usize = 1000;
    assert!((3..=6).contains(&r), "random configurations support r = 3..6");
    for _ in 0..MAX_ATTEMPTS {
        let n_std = r.min(4);
        let extras: Vec<(Q, Q)> =
            (0..r - n_std).map(|_| (random_q(rng), random_q(rng))).collect();
        let cfg = PointConfig::standard_with(n_std, &extras);
        if cfg.validate_general_position().is_ok() {
            return Ok(cfg);
        }
    }
    Err(GeomError::SamplingExhausted(MAX_ATTEMPTS))
}

/// Random affine rational point off every realized line of the surface (and
/// distinct from the affine configuration points), suitable as the base
/// point of germ evaluation.
pub fn random_base_point<R: rand::Rng>(
    data: &SurfaceData,
    cfg: &PointConfig,
    rng: &mut R,
) -> Result<(Q, Q), GeomError> {
    const MAX_ATTEMPTS: usize = 1000;
    // Precompute the curves of all line classes with plane models.
    let mut curves = Vec::new();
    for class in data.lines.classes() {
        if class.d() >= 1 {
            curves.push(line_curve(class, cfg)?);
        }
    }
    'attempt: for _ in 0..MAX_ATTEMPTS {
        let x = random_q(rng);
        let y = random_q(rng);
        let p = [x.clone(), y.clone(), Q::one()];
        for q in &cfg.points {
            if proj_eq(&p, q) {
                continue 'attempt;
            }
        }
        for curve in &curves {
            if curve.eval(&p).is_zero() {
                continue 'attempt;
            }
        }
        return Ok((x, y));
    }
    Err(GeomError::SamplingExhausted(MAX_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface(r: usize) -> SurfaceData {
        SurfaceData::build(r).unwrap()
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(1), vec![(1, 0, 0), (0, 1, 0), (0, 0, 1)]);
        assert_eq!(monomials(2).len(), 6);
        assert_eq!(monomials(3).len(), 10);
    }

    #[test]
    fn form_arithmetic_roundtrip() {
        // (X - Y) * (X + Y) = X^2 - Y^2
        let a = Form::linear(q_i64(1), q_i64(-1), q_i64(0));
        let b = Form::linear(q_i64(1), q_i64(1), q_i64(0));
        let prod = a.mul(&b);
        let p = [q_i64(3), q_i64(2), q_i64(1)];
        assert_eq!(prod.eval(&p), q_i64(5));
        assert_eq!(prod.partial(0).eval(&p), q_i64(6));
        assert_eq!(prod.partial(1).eval(&p), q_i64(-4));
    }

    #[test]
    fn linear_system_dimensions_on_x4() {
        let cfg = PointConfig::standard_with(4, &[]);
        // Pencil of lines through p_1.
        let c = &PicClass::hyperplane(4) - &PicClass::exceptional(4, 1);
        assert_eq!(linear_system(&c, &cfg).unwrap().len(), 2);
        // Conics through all four points.
        let mut q = PicClass::hyperplane(4);
        q = &q + &PicClass::hyperplane(4);
        for i in 1..=4 {
            q = &q - &PicClass::exceptional(4, i);
        }
        assert_eq!(linear_system(&q, &cfg).unwrap().len(), 2);
        // The line through p_3 = [0:0:1] and p_4 = [1:1:1] is X - Y = 0.
        let l34 = &(&PicClass::hyperplane(4) - &PicClass::exceptional(4, 3))
            - &PicClass::exceptional(4, 4);
        let curve = line_curve(&l34, &cfg).unwrap();
        let expected = Form::linear(q_i64(1), q_i64(-1), q_i64(0)).normalized();
        assert_eq!(curve, expected);
        // Exceptional classes have no plane model.
        assert!(matches!(
            linear_system(&PicClass::exceptional(4, 1), &cfg),
            Err(GeomError::UnsupportedClass(_))
        ));
    }

    #[test]
    fn general_position_detects_collinearity_and_conics() {
        // p_5 on the line x = y through p_3 and p_4.
        let cfg = PointConfig::standard_with(4, &[(q_i64(2), q_i64(2))]);
        assert!(matches!(
            cfg.validate_general_position(),
            Err(GeomError::Degenerate(_))
        ));
        // Six points on a conic: parametrize the conic through the five
        // points of the default X_5 configuration and pick a sixth on it.
        let (a, b) = x5_default_parameters();
        let cfg5 = PointConfig::standard_with(4, &[(a, b)]);
        let mut conic_class = &PicClass::hyperplane(5) + &PicClass::hyperplane(5);
        for i in 1..=5 {
            conic_class = &conic_class - &PicClass::exceptional(5, i);
        }
        let conic = {
            let basis = linear_system(&conic_class, &cfg5).unwrap();
            assert_eq!(basis.len(), 1);
            basis.into_iter().next().unwrap()
        };
        let param = parametrize_curve(&conic, Some(&cfg5.points[3])).unwrap();
        let p6 = (0..)
            .map(|k| param.at(&q_i64(7919 + k)))
            .find(|p| !p[2].is_zero() && cfg5.points.iter().all(|q| !proj_eq(p, q)))
            .unwrap();
        assert!(conic.eval(&p6).is_zero());
        let p6_affine = (&p6[0] / &p6[2], &p6[1] / &p6[2]);
        let (a, b) = x5_default_parameters();
        let cfg6 = PointConfig::standard_with(4, &[(a, b), p6_affine]);
        match cfg6.validate_general_position() {
            Err(GeomError::Degenerate(msg)) => assert!(msg.contains("conic"), "{msg}"),
            other => panic!("expected conic degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn builtin_x4_models_are_normalized() {
        let data = surface(4);
        let (_cfg, models) = builtin_x4(&data).unwrap();
        assert_eq!(models.len(), 5);
        // The matched classes, in formula order.
        let expect_class = |coords: &[i64]| PicClass::from_coords(coords);
        let expected = [
            expect_class(&[1, 0, 1, 0, 0]), // x: lines through p_2
            expect_class(&[1, 1, 0, 0, 0]), // y: lines through p_1
            expect_class(&[1, 0, 0, 1, 0]), // x/y: lines through p_3
            expect_class(&[1, 0, 0, 0, 1]), // (1-y)/(1-x): lines through p_4
            expect_class(&[2, 1, 1, 1, 1]), // conics through all four
        ];
        for (model, want) in models.iter().zip(expected) {
            assert_eq!(model.class, want, "{}", model.label);
            assert_eq!(
                model.singular_values,
                vec![
                    PencilValue::Finite(Q::zero()),
                    PencilValue::Finite(Q::one()),
                    PencilValue::Infinity
                ]
            );
        }
        // Classes are pairwise distinct and the fiber orders align.
        for m in &models {
            assert_eq!(m.fiber_order.len(), 3);
        }
    }

    #[test]
    fn builtin_x5_reproduces_the_ratio_table() {
        let data = surface(5);
        let (a, b) = x5_default_parameters();
        let (_cfg, models) = builtin_x5(&data, &a, &b).unwrap();
        assert_eq!(models.len(), 10);
        let expected: Vec<Q> = vec![
            q_i64(3),
            q_ratio(1, 5),
            q_ratio(5, 3),
            q_i64(-1),
            q_i64(-5),
            q_ratio(2, 5),
            q_ratio(-1, 2),
            q_i64(-4),
            q_ratio(1, 2),
            q_ratio(6, 5),
        ];
        for (model, want) in models.iter().zip(expected) {
            assert_eq!(model.singular_values.len(), 4);
            assert_eq!(model.singular_values[2], PencilValue::Finite(want), "{}", model.label);
            assert_eq!(model.singular_values[3], PencilValue::Infinity);
        }
        // All ten matched classes are distinct conic classes.
        let mut classes: Vec<usize> = models.iter().map(|m| m.class_index).collect();
        classes.sort_unstable();
        classes.dedup();
        assert_eq!(classes.len(), 10);
    }

    #[test]
    fn builtin_x5_ratio_formulas_hold_for_random_parameters() {
        use rand::SeedableRng;
        let data = surface(5);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(41);
        for _ in 0..5 {
            let (a, b) = random_x5_parameters(&mut rng).unwrap();
            let (_cfg, models) = builtin_x5(&data, &a, &b).unwrap();
            let ratios = x5_expected_ratios(&a, &b);
            for (model, r_i) in models.iter().zip(ratios) {
                assert_eq!(
                    model.singular_values[2],
                    PencilValue::Finite(r_i),
                    "{} at (a, b) = ({a}, {b})",
                    model.label
                );
            }
        }
    }

    #[test]
    fn x5_rejects_invalid_parameters() {
        let data = surface(5);
        assert!(matches!(
            builtin_x5(&data, &q_i64(1), &q_i64(5)),
            Err(GeomError::Degenerate(_))
        ));
        assert!(matches!(
            builtin_x5(&data, &q_i64(4), &q_i64(4)),
            Err(GeomError::Degenerate(_))
        ));
    }

    #[test]
    fn pencil_models_on_x3_are_coordinate_pencils() {
        let data = surface(3);
        let cfg = PointConfig::standard_with(3, &[]);
        let models = pencil_models(&data, &cfg).unwrap();
        assert_eq!(models.len(), 3);
        for m in &models {
            assert_eq!(m.singular_values.len(), 2);
            assert_eq!(m.singular_values[1], PencilValue::Infinity);
            assert!(m.singular_values[0].as_finite().is_some());
        }
    }

    #[test]
    fn pencil_models_on_x6_are_normalized_and_distinct() {
        use rand::SeedableRng;
        let data = surface(6);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let cfg = random_config(6, &mut rng).unwrap();
        let models = pencil_models(&data, &cfg).unwrap();
        assert_eq!(models.len(), 27);
        for m in &models {
            assert_eq!(m.singular_values.len(), 5);
            assert_eq!(m.singular_values[4], PencilValue::Infinity);
            let finite: Vec<&Q> = m
                .singular_values[..4]
                .iter()
                .map(|v| v.as_finite().expect("finite"))
                .collect();
            for w in finite.windows(2) {
                assert!(w[0] < w[1], "finite values sorted ascending");
            }
            // The affine normalization pins the two smallest finite values.
            assert!(finite[0].is_zero(), "{}", m.label);
            assert!(finite[1].is_one(), "{}", m.label);
        }
    }

    #[test]
    fn base_point_sampling_avoids_lines() {
        use rand::SeedableRng;
        let data = surface(4);
        let cfg = PointConfig::standard_with(4, &[]);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let (x, y) = random_base_point(&data, &cfg, &mut rng).unwrap();
        // Off the six realized lines: coordinates differ from 0, 1, each other.
        assert!(!x.is_zero() && !y.is_zero());
        assert_ne!(x, Q::one());
        assert_ne!(y, Q::one());
        assert_ne!(x, y);
    }

    #[test]
    fn mobius_normalization_is_exact() {
        // A model whose raw reference value is 0 exercises the swap branch.
        let num = Form::linear(q_i64(1), q_i64(0), q_i64(0));
        let den = Form::linear(q_i64(0), q_i64(1), q_i64(0));
        let (n2, d2) = send_to_infinity(&num, &den, &PencilValue::Finite(Q::zero()));
        // New value at [x : y : 1] is y / x: old 0 (x = 0) now infinite.
        let p = [Q::zero(), q_i64(7), Q::one()];
        assert_eq!(
            PencilValue::from_pair(n2.eval(&p), d2.eval(&p)).unwrap(),
            PencilValue::Infinity
        );
    }
}
