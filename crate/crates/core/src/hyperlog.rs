//! Numeric hyperlogarithms: germ transport, antisymmetrization, and the
//! Rogers dilogarithm.
//!
//! For a finite alphabet of singular points `sigma_0, ..., sigma_{m-1}` the
//! hyperlogarithm of a word `W = (s_1, ..., s_k)` based at `y` is defined by
//!
//! ```text
//! F_()  = 1,
//! dF_W / dz = F_{tail(W)}(z) / (z - sigma_{head(W)}),      F_W(y) = 0,
//! ```
//!
//! with the first letter outermost.  All words up to a fixed weight are
//! transported together along a polyline by propagating Taylor germs: at each
//! point the ODE recurrence turns the coefficient vectors of shorter words
//! into those of longer ones, and a step is accepted only when an embedded
//! tail estimate is below tolerance.  Steps never exceed a fixed fraction of
//! the distance to the nearest singularity, so each Taylor series converges
//! geometrically.
//!
//! The antisymmetrization `AI^k` over `k` distinct letters is the signed
//! average of `F` over all orderings of the letters; at weight 2 over the
//! alphabet `{0, 1}` it reproduces the Rogers dilogarithm up to explicit
//! logarithmic terms, which this module verifies against a direct series
//! evaluation of `Li_2`.

use num_complex::Complex64;
use thiserror::Error;

/// Maximum fraction of the distance to the nearest singularity used as the
/// step size.
pub const STEP_SAFETY: f64 = 0.4;
/// Hard cap on the Taylor order of a single step.
pub const MAX_TAYLOR_ORDER: usize = 64;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("base point {0} coincides with a singularity")]
    BaseAtSingularity(Complex64),
    #[error("path through {z} is within clearance {clearance:e} of singularity {sigma}")]
    PathTooClose { z: Complex64, sigma: Complex64, clearance: f64 },
    #[error("step size underflow near {0}")]
    StepUnderflow(Complex64),
    #[error("a transported value became non-finite near {0}")]
    NonFinite(Complex64),
    #[error("path must contain at least one target point")]
    EmptyPath,
}

/// Transport tolerances.
#[derive(Clone, Copy, Debug)]
pub struct TransportOptions {
    /// Relative tolerance of the embedded per-step error estimate.
    pub rel_tol: f64,
    /// Minimum allowed distance between the path and any singularity.
    pub clearance: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { rel_tol: 1e-13, clearance: 0.0 }
    }
}

// ---------------------------------------------------------------------------
// Word indexing
// ---------------------------------------------------------------------------

/// Dense index of all words over an `m`-letter alphabet up to a fixed
/// length, ordered by length and then lexicographically; the empty word has
/// index 0.
#[derive(Clone, Debug)]
pub struct WordFamily {
    m: usize,
    weight: usize,
    /// Index of the tail word (word without its first letter).
    tail: Vec<u32>,
    /// First letter of each nonempty word.
    head: Vec<u8>,
    /// Start index of each length block.
    offsets: Vec<usize>,
}

impl WordFamily {
    pub fn new(m: usize, weight: usize) -> Self {
        assert!(m >= 1 && m <= 16, "alphabet size out of range");
        assert!(weight <= 6, "weight out of range");
        let mut offsets = vec![0usize];
        let mut block = 1usize;
        for _ in 0..=weight {
            block *= m;
            offsets.push(offsets.last().unwrap() + block / m);
        }
        let count = offsets[weight + 1];
        let mut tail = vec![0u32; count];
        let mut head = vec![0u8; count];
        let mut word = Vec::new();
        for idx in 0..count {
            Self::word_at(&offsets, m, idx, &mut word);
            if !word.is_empty() {
                head[idx] = word[0];
                tail[idx] = Self::index_of(&offsets, m, &word[1..]) as u32;
            }
        }
        WordFamily { m, weight, tail, head, offsets }
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn count(&self) -> usize {
        self.offsets[self.weight + 1]
    }

    fn index_of(offsets: &[usize], m: usize, word: &[u8]) -> usize {
        let mut digits = 0usize;
        for &letter in word {
            debug_assert!((letter as usize) < m);
            digits = digits * m + letter as usize;
        }
        offsets[word.len()] + digits
    }

    fn word_at(offsets: &[usize], m: usize, idx: usize, out: &mut Vec<u8>) {
        let len = offsets.iter().skip(1).position(|&o| idx < o).unwrap();
        let mut digits = idx - offsets[len];
        out.clear();
        out.resize(len, 0);
        for slot in out.iter_mut().rev() {
            *slot = (digits % m) as u8;
            digits /= m;
        }
    }

    /// Index of a word (letters are alphabet positions).
    pub fn index(&self, word: &[u8]) -> usize {
        assert!(word.len() <= self.weight);
        Self::index_of(&self.offsets, self.m, word)
    }

    /// The word at an index.
    pub fn word(&self, idx: usize) -> Vec<u8> {
        let mut out = Vec::new();
        Self::word_at(&self.offsets, self.m, idx, &mut out);
        out
    }
}

// ---------------------------------------------------------------------------
// Germ transport
// ---------------------------------------------------------------------------

/// The values of all hyperlogarithms up to a weight at a moving point.
#[derive(Clone, Debug)]
pub struct Germ {
    family: WordFamily,
    sigma: Vec<Complex64>,
    z: Complex64,
    values: Vec<Complex64>,
}

impl Germ {
    /// Fresh germ at the base point: the empty word is 1, all others 0.
    pub fn new(sigma: &[Complex64], weight: usize, base: Complex64) -> Result<Self, TransportError> {
        let family = WordFamily::new(sigma.len(), weight);
        if sigma.iter().any(|s| (base - s).norm() == 0.0) {
            return Err(TransportError::BaseAtSingularity(base));
        }
        let mut values = vec![Complex64::new(0.0, 0.0); family.count()];
        values[0] = Complex64::new(1.0, 0.0);
        Ok(Germ { family, sigma: sigma.to_vec(), z: base, values })
    }

    pub fn family(&self) -> &WordFamily {
        &self.family
    }

    pub fn position(&self) -> Complex64 {
        self.z
    }

    /// Current value of a word.
    pub fn value(&self, word: &[u8]) -> Complex64 {
        self.values[self.family.index(word)]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Signed average of `F` over all orderings of the given distinct
    /// letters (the antisymmetrized hyperlogarithm of that sub-alphabet).
    pub fn antisymmetrized(&self, letters: &[u8]) -> Complex64 {
        let k = letters.len();
        let mut perm = letters.to_vec();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut sign = 1.0f64;
        // Heap's algorithm; every emitted permutation differs from the
        // previous one by a single transposition, so the parity alternates.
        let mut c = vec![0usize; k];
        acc += sign * self.values[self.family.index(&perm)];
        let mut i = 0;
        while i < k {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                sign = -sign;
                acc += sign * self.values[self.family.index(&perm)];
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        let mut factorial = 1.0f64;
        for j in 2..=k {
            factorial *= j as f64;
        }
        acc / factorial
    }

    /// Transports the germ along straight segments through the waypoints.
    pub fn transport(&mut self, waypoints: &[Complex64], opts: &TransportOptions) -> Result<(), TransportError> {
        if waypoints.is_empty() {
            return Err(TransportError::EmptyPath);
        }
        for &target in waypoints {
            self.check_segment_clearance(self.z, target, opts.clearance)?;
            self.transport_segment(target, opts)?;
        }
        Ok(())
    }

    fn check_segment_clearance(
        &self,
        a: Complex64,
        b: Complex64,
        clearance: f64,
    ) -> Result<(), TransportError> {
        for &s in &self.sigma {
            let d = dist_point_segment(s, a, b);
            if d < clearance || d == 0.0 {
                return Err(TransportError::PathTooClose { z: a, sigma: s, clearance });
            }
        }
        Ok(())
    }

    fn transport_segment(&mut self, target: Complex64, opts: &TransportOptions) -> Result<(), TransportError> {
        loop {
            let rem = target - self.z;
            let rem_norm = rem.norm();
            if rem_norm == 0.0 {
                return Ok(());
            }
            let rho = self
                .sigma
                .iter()
                .map(|s| (self.z - s).norm())
                .fold(f64::INFINITY, f64::min);
            if !rho.is_finite() || rho == 0.0 {
                return Err(TransportError::StepUnderflow(self.z));
            }
            let mut hmag = rem_norm.min(STEP_SAFETY * rho);
            let dir = rem / rem_norm;
            loop {
                let lands_on_target = hmag >= rem_norm;
                let h = if lands_on_target { rem } else { dir * hmag };
                if let Some(new_values) = self.try_step(h, opts.rel_tol) {
                    if new_values.iter().any(|v| !v.is_finite()) {
                        return Err(TransportError::NonFinite(self.z));
                    }
                    self.values = new_values;
                    self.z = if lands_on_target { target } else { self.z + h };
                    break;
                }
                hmag *= 0.5;
                if hmag < 1e-14 * (1.0 + self.z.norm()) {
                    return Err(TransportError::StepUnderflow(self.z));
                }
            }
        }
    }

    /// One Taylor step of size `h`.  Coefficients are generated by the ODE
    /// recurrence; the order grows until an embedded tail estimate drops
    /// below tolerance, else the step is rejected.
    fn try_step(&self, h: Complex64, rel_tol: f64) -> Option<Vec<Complex64>> {
        let count = self.family.count();
        let m = self.sigma.len();
        for order in [16usize, 32, MAX_TAYLOR_ORDER] {
            // Taylor coefficients of 1/(z - sigma) about the current point:
            // c_k = (-1)^k beta^{k+1} with beta = 1/(z0 - sigma).
            let mut pole = vec![vec![Complex64::new(0.0, 0.0); order]; m];
            for (s, row) in self.sigma.iter().zip(pole.iter_mut()) {
                let beta = 1.0 / (self.z - s);
                let mut c = beta;
                for slot in row.iter_mut() {
                    *slot = c;
                    c *= -beta;
                }
            }
            // a[w][n]; words are index-ordered by length, so tails (shorter
            // words) are always filled before their extensions.
            let mut a = vec![vec![Complex64::new(0.0, 0.0); order + 1]; count];
            a[0][0] = Complex64::new(1.0, 0.0);
            for w in 1..count {
                a[w][0] = self.values[w];
                let t = self.family.tail[w] as usize;
                let head = self.family.head[w] as usize;
                // Split borrows: tail index is always smaller.
                let (before, after) = a.split_at_mut(w);
                let (aw, at) = (&mut after[0], &before[t]);
                for n in 1..=order {
                    let mut conv = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        conv += at[j] * pole[head][n - 1 - j];
                    }
                    aw[n] = conv / n as f64;
                }
            }
            // Evaluate and estimate the truncation error from the last terms.
            let habs = h.norm();
            let mut new_values = vec![Complex64::new(0.0, 0.0); count];
            let mut max_tail = 0.0f64;
            let mut scale = 1.0f64;
            for w in 0..count {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in (0..=order).rev() {
                    acc = acc * h + a[w][n];
                }
                new_values[w] = acc;
                scale = scale.max(acc.norm());
                let mut tail = 0.0f64;
                let mut hp = habs.powi(order as i32 - 3);
                for n in order - 3..=order {
                    tail += a[w][n].norm() * hp;
                    hp *= habs;
                }
                max_tail = max_tail.max(tail);
            }
            if max_tail <= rel_tol * scale {
                return Some(new_values);
            }
        }
        None
    }
}

fn dist_point_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

// ---------------------------------------------------------------------------
// Dilogarithm oracles
// ---------------------------------------------------------------------------

/// `Li_2(x)` for `0 <= x < 1`, by series below 1/2 and reflection above.
pub fn dilog(x: f64) -> f64 {
    assert!((0.0..1.0).contains(&x), "dilog domain is [0, 1)");
    if x > 0.5 {
        let y = 1.0 - x;
        return std::f64::consts::PI.powi(2) / 6.0 - x.ln() * y.ln() - dilog(y);
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    for n in 1..200 {
        power *= x;
        let term = power / ((n * n) as f64);
        sum += term;
        if term < 1e-18 {
            break;
        }
    }
    sum
}

/// Rogers dilogarithm `R(x) = Li_2(x) + ln(x) ln(1-x) / 2 - pi^2 / 6` on
/// `(0, 1)`.
pub fn rogers_r(x: f64) -> f64 {
    assert!(x > 0.0 && x < 1.0, "rogers_r domain is (0, 1)");
    dilog(x) + 0.5 * x.ln() * (1.0 - x).ln() - std::f64::consts::PI.powi(2) / 6.0
}

/// Residual of Abel's five-term relation at `(x, y)`, `0 < x < y < 1`.
pub fn abel_five_term_residual(x: f64, y: f64) -> f64 {
    let r = rogers_r;
    (r(x) - r(y) - r(x / y) - r((1.0 - y) / (1.0 - x))
        + r(x * (1.0 - y) / (y * (1.0 - x))))
    .abs()
}

// ---------------------------------------------------------------------------
// Weight-3 reduction search
// ---------------------------------------------------------------------------

/// Result of matching the antisymmetrized weight-3 value against products of
/// logarithms with antisymmetrized weight-2 values over sub-alphabets.
#[derive(Clone, Debug)]
pub struct Weight3Reduction {
    /// Best sign vector `(s_0, ..., s_3)`.
    pub signs: [i8; 4],
    /// Residual of the best combination.
    pub residual: f64,
    /// Antisymmetrized weight-3 value.
    pub ai3: Complex64,
}

/// Compares `AI^3` over a 3-letter alphabet with the combination
/// `(1/3) sum_k s_k (-1)^(k-1) Log_k AI^2_k`, where `Log_k` is the
/// single-letter value and `AI^2_k` antisymmetrizes the other two letters.
/// All 16 sign vectors are tried; the smallest residual wins.
pub fn weight3_reduction(
    sigma: &[Complex64; 3],
    base: Complex64,
    target: Complex64,
    opts: &TransportOptions,
) -> Result<Weight3Reduction, TransportError> {
    let mut germ = Germ::new(sigma, 3, base)?;
    germ.transport(&[target], opts)?;
    let ai3 = germ.antisymmetrized(&[0, 1, 2]);
    let mut products = [Complex64::new(0.0, 0.0); 3];
    for k in 0..3u8 {
        let others: Vec<u8> = (0..3u8).filter(|&j| j != k).collect();
        let log_k = germ.value(&[k]);
        let ai2_k = germ.antisymmetrized(&others);
        let parity = if k % 2 == 0 { 1.0 } else { -1.0 }; // (-1)^(k-1) for k = 1..3
        products[k as usize] = parity * log_k * ai2_k / 3.0;
    }
    let mut best: Option<Weight3Reduction> = None;
    for mask in 0..16u32 {
        let signs: [i8; 4] = std::array::from_fn(|i| if mask & (1 << i) == 0 { 1 } else { -1 });
        let mut rhs = Complex64::new(0.0, 0.0);
        for k in 0..3 {
            rhs += signs[k + 1] as f64 * products[k];
        }
        let residual = (signs[0] as f64 * ai3 - rhs).norm();
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(Weight3Reduction { signs, residual, ai3 });
        }
    }
    Ok(best.expect("sign search is nonempty"))
}
