//! Exact arithmetic with rational combinations of roots of unity.
//!
//! A [`CycloNum`] is an element of the group algebra `Q[Z/M]` read through
//! `k ↦ e[k/M]`. Different orders are combined by lifting to the lcm. Equality
//! with zero is decided by reducing the associated polynomial modulo the
//! cyclotomic polynomial `Φ_M`, so the zero test does not depend on the chosen
//! representation.
//!
//! Coefficients are stored as `i128` numerators over one common positive
//! denominator. Every arithmetic step is checked; an overflow panics instead
//! of producing a wrong answer.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

const OVERFLOW: &str = "cyclotomic coefficient overflow (i128)";

#[inline]
fn cmul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect(OVERFLOW)
}

#[inline]
fn cadd(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect(OVERFLOW)
}

fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// An exact element of a cyclotomic field, `Σ_k (c_k / den) · e[k / order]`.
#[derive(Clone, Debug)]
pub struct CycloNum {
    order: u64,
    den: i128,
    /// Sorted by exponent; exponents lie in `0..order`; numerators are nonzero.
    terms: Vec<(u64, i128)>,
}

impl CycloNum {
    /// The number 0.
    pub fn zero() -> Self {
        CycloNum { order: 1, den: 1, terms: Vec::new() }
    }

    /// The number 1.
    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// An integer.
    pub fn from_int(n: i128) -> Self {
        Self::from_ratio(n, 1)
    }

    /// The rational number `num / den` (`den ≠ 0`).
    pub fn from_ratio(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        Self::normalized(1, den, vec![(0, num)])
    }

    /// `e[k / m]` for `m ≥ 1`.
    pub fn root(k: i64, m: u64) -> Self {
        assert!(m >= 1, "root of unity needs a positive order");
        let k = (k as i128).rem_euclid(m as i128) as u64;
        Self::normalized(m, 1, vec![(k, 1)])
    }

    /// `e[r]` for a rational `r`.
    pub fn root_of_unity(r: Ratio<i64>) -> Self {
        Self::root(*r.numer(), *r.denom() as u64)
    }

    /// `c · e[k / m]` with a rational coefficient `c = num / den`.
    pub fn monomial(num: i128, den: i128, k: i64, m: u64) -> Self {
        let k = (k as i128).rem_euclid(m as i128) as u64;
        Self::normalized(m, den, vec![(k, num)])
    }

    /// Builds `Σ coeffs[k] e[k / order] / den` from a dense coefficient vector.
    pub fn from_dense(order: u64, den: i128, coeffs: &[i128]) -> Self {
        assert_eq!(coeffs.len() as u64, order);
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| (k as u64, c))
            .collect();
        Self::normalized(order, den, terms)
    }

    /// Builds a value from unsorted terms; repeated exponents are merged.
    pub fn from_terms(order: u64, den: i128, mut terms: Vec<(u64, i128)>) -> Self {
        for t in terms.iter_mut() {
            t.0 %= order;
        }
        terms.sort_unstable_by_key(|t| t.0);
        let mut merged: Vec<(u64, i128)> = Vec::with_capacity(terms.len());
        for (k, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 = cadd(last.1, c),
                _ => merged.push((k, c)),
            }
        }
        Self::normalized(order, den, merged)
    }

    fn normalized(order: u64, den: i128, terms: Vec<(u64, i128)>) -> Self {
        let mut terms: Vec<(u64, i128)> = terms.into_iter().filter(|t| t.1 != 0).collect();
        if terms.is_empty() {
            return Self::zero();
        }
        let mut den = den;
        let mut g = den.abs();
        for t in &terms {
            g = g.gcd(&t.1);
        }
        if den < 0 {
            g = -g;
        }
        if g != 1 {
            den /= g;
            for t in terms.iter_mut() {
                t.1 /= g;
            }
        }
        let mut h = order;
        for t in &terms {
            h = h.gcd(&t.0);
            if h == 1 {
                break;
            }
        }
        let mut order = order;
        if h > 1 {
            order /= h;
            for t in terms.iter_mut() {
                t.0 /= h;
            }
        }
        CycloNum { order, den, terms }
    }

    /// The order `M` of the group algebra `Q[Z/M]` holding this value.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Common denominator of the stored coefficients.
    pub fn denominator(&self) -> i128 {
        self.den
    }

    /// Stored terms as `(exponent, numerator)` over [`Self::denominator`].
    pub fn terms(&self) -> &[(u64, i128)] {
        &self.terms
    }

    /// The stored coefficient of `e[k / order]`.
    pub fn coeff(&self, k: u64) -> Ratio<i128> {
        match self.terms.binary_search_by_key(&k, |t| t.0) {
            Ok(i) => Ratio::new(self.terms[i].1, self.den),
            Err(_) => Ratio::from_integer(0),
        }
    }

    /// Terms as `(exponent, numerator, denominator)` with each fraction reduced.
    pub fn exact_triples(&self) -> Vec<(u64, i128, i128)> {
        self.terms
            .iter()
            .map(|&(k, c)| {
                let r = Ratio::new(c, self.den);
                (k, *r.numer(), *r.denom())
            })
            .collect()
    }

    /// True when no term is stored; a value can still be zero otherwise.
    pub fn is_trivially_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn scaled_terms(&self, order: u64, factor: i128) -> impl Iterator<Item = (u64, i128)> + '_ {
        let s = order / self.order;
        self.terms.iter().map(move |&(k, c)| (k * s, cmul(c, factor)))
    }

    /// Sum of two values.
    pub fn add(&self, other: &Self) -> Self {
        if self.terms.is_empty() {
            return other.clone();
        }
        if other.terms.is_empty() {
            return self.clone();
        }
        let order = lcm_u64(self.order, other.order);
        let den = self.den.lcm(&other.den);
        let a: Vec<_> = self.scaled_terms(order, den / self.den).collect();
        let b: Vec<_> = other.scaled_terms(order, den / other.den).collect();
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                out.push((a[i].0, cadd(a[i].1, b[j].1)));
                i += 1;
                j += 1;
            }
        }
        Self::normalized(order, den, out)
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        CycloNum {
            order: self.order,
            den: self.den,
            terms: self.terms.iter().map(|&(k, c)| (k, -c)).collect(),
        }
    }

    /// Difference of two values.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Product of two values.
    pub fn mul(&self, other: &Self) -> Self {
        if self.terms.is_empty() || other.terms.is_empty() {
            return Self::zero();
        }
        let order = lcm_u64(self.order, other.order);
        let den = cmul(self.den, other.den);
        let sa = order / self.order;
        let sb = order / other.order;
        if self.terms.len() * other.terms.len() <= 64 || self.terms.len() * other.terms.len() < order as usize / 4 {
            let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
            for &(ka, ca) in &self.terms {
                for &(kb, cb) in &other.terms {
                    out.push(((ka * sa + kb * sb) % order, cmul(ca, cb)));
                }
            }
            return Self::from_terms(order, den, out);
        }
        let mut dense = vec![0i128; order as usize];
        for &(ka, ca) in &self.terms {
            let ka = ka * sa;
            for &(kb, cb) in &other.terms {
                let k = ((ka + kb * sb) % order) as usize;
                dense[k] = cadd(dense[k], cmul(ca, cb));
            }
        }
        Self::from_dense(order, den, &dense)
    }

    /// Multiplication by the rational number `num / den`.
    pub fn scale(&self, num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        if num == 0 || self.terms.is_empty() {
            return Self::zero();
        }
        let g = num.gcd(&self.den);
        let h = den.gcd(&self.terms.iter().fold(0i128, |acc, t| acc.gcd(&t.1)));
        let terms = self.terms.iter().map(|&(k, c)| (k, cmul(c / h, num / g))).collect();
        Self::normalized(self.order, cmul(self.den / g, den / h), terms)
    }

    /// Multiplication by `e[k / m]`.
    pub fn mul_root(&self, k: i64, m: u64) -> Self {
        self.mul(&Self::root(k, m))
    }

    /// Complex conjugate: `e[k/M] ↦ e[-k/M]`, coefficients are rational.
    pub fn conj(&self) -> Self {
        let terms = self.terms.iter().map(|&(k, c)| ((self.order - k) % self.order, c)).collect();
        Self::from_terms(self.order, self.den, terms)
    }

    /// Exact zero test by reduction modulo `Φ_order`.
    pub fn is_zero(&self) -> bool {
        if self.terms.is_empty() {
            return true;
        }
        self.reduced_coeffs().iter().all(|&c| c == 0)
    }

    /// Exact equality.
    pub fn equals(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// Canonical coefficients modulo `Φ_order`: the numerators of the unique
    /// representation `Σ_{k < φ(order)} c_k ζ^k` over [`Self::denominator`].
    pub fn reduced_coeffs(&self) -> Vec<i128> {
        let phi = cyclotomic_polynomial(self.order);
        let deg = phi.coeffs.len() - 1;
        let mut dense = vec![0i128; self.order as usize];
        for &(k, c) in &self.terms {
            dense[k as usize] = c;
        }
        for i in (deg..dense.len()).rev() {
            let c = dense[i];
            if c == 0 {
                continue;
            }
            dense[i] = 0;
            let shift = i - deg;
            for &(j, pj) in &phi.lower_terms {
                let idx = shift + j;
                dense[idx] = dense[idx].checked_sub(cmul(c, pj)).expect(OVERFLOW);
            }
        }
        dense.truncate(deg);
        dense
    }

    /// The same number in canonical reduced form, usually with fewer terms.
    pub fn reduced(&self) -> Self {
        if self.terms.len() <= 1 {
            return self.clone();
        }
        let coeffs = self.reduced_coeffs();
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(k, &c)| (k as u64, c))
            .collect();
        Self::normalized(self.order, self.den, terms)
    }

    /// Double-precision complex value.
    pub fn embed(&self) -> Complex64 {
        let m = self.order as f64;
        let d = self.den as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(k, c) in &self.terms {
            let theta = std::f64::consts::TAU * (k as f64) / m;
            acc += Complex64::from_polar(c as f64 / d, theta);
        }
        acc
    }

    /// The value as a rational number, if it is one.
    pub fn as_rational(&self) -> Option<Ratio<i128>> {
        let r = self.reduced();
        match r.terms.as_slice() {
            [] => Some(Ratio::from_integer(0)),
            [(0, c)] if r.order == 1 => Some(Ratio::new(*c, r.den)),
            _ => None,
        }
    }
}

impl Default for CycloNum {
    fn default() -> Self {
        Self::zero()
    }
}

impl PartialEq for CycloNum {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .exact_triples()
            .iter()
            .map(|&(k, n, d)| {
                let c = if d == 1 { format!("{n}") } else { format!("{n}/{d}") };
                if k == 0 {
                    c
                } else {
                    format!("{c}*e[{k}/{}]", self.order)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl std::ops::$tr<&CycloNum> for &CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: &CycloNum) -> CycloNum {
                CycloNum::$inner(self, rhs)
            }
        }
        impl std::ops::$tr<CycloNum> for CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: CycloNum) -> CycloNum {
                CycloNum::$inner(&self, &rhs)
            }
        }
        impl std::ops::$tr<&CycloNum> for CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: &CycloNum) -> CycloNum {
                CycloNum::$inner(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);

impl std::ops::Neg for CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        CycloNum::neg(&self)
    }
}

impl std::iter::Sum for CycloNum {
    fn sum<I: Iterator<Item = CycloNum>>(iter: I) -> CycloNum {
        let mut acc = Accumulator::new();
        for x in iter {
            acc.add(&x);
        }
        acc.finish()
    }
}

/// Dense accumulator for long sums of cyclotomic numbers.
///
/// Sums are kept over a growing common order and denominator so that adding a
/// term costs time proportional to its size, not to the size of the sum.
#[derive(Clone, Debug)]
pub struct Accumulator {
    order: u64,
    den: i128,
    dense: Vec<i128>,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl Accumulator {
    /// An empty sum.
    pub fn new() -> Self {
        Accumulator { order: 1, den: 1, dense: vec![0] }
    }

    fn adapt(&mut self, order: u64, den: i128) {
        let new_order = lcm_u64(self.order, order);
        if new_order != self.order {
            let s = (new_order / self.order) as usize;
            let mut dense = vec![0i128; new_order as usize];
            for (k, &c) in self.dense.iter().enumerate() {
                dense[k * s] = c;
            }
            self.dense = dense;
            self.order = new_order;
        }
        let new_den = self.den.lcm(&den);
        if new_den != self.den {
            let f = new_den / self.den;
            for c in self.dense.iter_mut() {
                if *c != 0 {
                    *c = cmul(*c, f);
                }
            }
            self.den = new_den;
        }
    }

    /// Adds `x`.
    pub fn add(&mut self, x: &CycloNum) {
        if x.terms.is_empty() {
            return;
        }
        self.adapt(x.order, x.den);
        let s = self.order / x.order;
        let f = self.den / x.den;
        for &(k, c) in &x.terms {
            let i = (k * s) as usize;
            self.dense[i] = cadd(self.dense[i], cmul(c, f));
        }
    }

    /// Adds the product `x · y` without materializing it.
    pub fn add_product(&mut self, x: &CycloNum, y: &CycloNum) {
        if x.terms.is_empty() || y.terms.is_empty() {
            return;
        }
        let order = lcm_u64(x.order, y.order);
        self.adapt(order, cmul(x.den, y.den));
        let f = self.den / (x.den * y.den);
        let so = self.order;
        let sx = so / x.order;
        let sy = so / y.order;
        for &(kx, cx) in &x.terms {
            let kx = kx * sx;
            let cx = cmul(cx, f);
            for &(ky, cy) in &y.terms {
                let i = ((kx + ky * sy) % so) as usize;
                self.dense[i] = cadd(self.dense[i], cmul(cx, cy));
            }
        }
    }

    /// The accumulated sum.
    pub fn finish(self) -> CycloNum {
        CycloNum::from_dense(self.order, self.den, &self.dense)
    }
}

/// An integer polynomial with its nonzero lower-order terms cached for reduction.
#[derive(Debug)]
pub struct CycloPoly {
    /// Coefficients in increasing degree; the leading coefficient is 1.
    pub coeffs: Vec<i128>,
    lower_terms: Vec<(usize, i128)>,
}

fn div_exact_monic(num: &[i128], den: &[i128]) -> Vec<i128> {
    let dd = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dd;
    let mut q = vec![0i128; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd];
        q[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] = rem[i + j].checked_sub(cmul(c, dj)).expect(OVERFLOW);
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "inexact cyclotomic division");
    q
}

fn phi_cache() -> &'static RwLock<HashMap<u64, Arc<CycloPoly>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<CycloPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The cyclotomic polynomial `Φ_m`, obtained from `x^m − 1 = ∏_{d | m} Φ_d`
/// by exact division and memoized in a thread-safe append-only table.
pub fn cyclotomic_polynomial(m: u64) -> Arc<CycloPoly> {
    assert!(m >= 1);
    if let Some(p) = phi_cache().read().expect("poisoned cache").get(&m) {
        return p.clone();
    }
    let mut poly = vec![0i128; m as usize + 1];
    poly[0] = -1;
    poly[m as usize] = 1;
    for d in crate::arith::divisors(m) {
        if d < m {
            let phi_d = cyclotomic_polynomial(d);
            poly = div_exact_monic(&poly, &phi_d.coeffs);
        }
    }
    let lower_terms = poly[..poly.len() - 1]
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| (j, c))
        .collect();
    let entry = Arc::new(CycloPoly { coeffs: poly, lower_terms });
    phi_cache().write().expect("poisoned cache").entry(m).or_insert(entry).clone()
}
