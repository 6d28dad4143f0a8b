//! Theta transformation matrices `M_{u,v}(σ)` for `σ ∈ SL₂(Z)` and numeric
//! evaluation of the theta series `θ_u`.
//!
//! The defining sum is
//! `M_{u,v}(σ) = (−i/(c√D)) Σ_{γ ∈ u + O_K/cO_K} e[(a|γ|² − γv̄ − γ̄v + d|v|²)/c]`
//! for `c ≠ 0`, and `sign(a) δ_{u,av} e[ab|u|²]` for `c = 0`.

use crate::arith::{bezout, mod_inv, modp, val};
use crate::charsums::{gauss_sum, minus_i_over_sqrt_d};
use crate::cyclotomic::CycloNum;
use crate::error::{precondition, Error, Result};
use crate::quadfield::{ClassRep, DiffClass, QuadField};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A 2×2 integer matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2Z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mat2Z {
    pub const I: Mat2Z = Mat2Z { a: 1, b: 0, c: 0, d: 1 };
    /// `J = [[0, −1], [1, 0]]`.
    pub const J: Mat2Z = Mat2Z { a: 0, b: -1, c: 1, d: 0 };
    /// `T = [[1, 1], [0, 1]]`.
    pub const T: Mat2Z = Mat2Z { a: 1, b: 1, c: 0, d: 1 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2Z { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2Z) -> Mat2Z {
        Mat2Z {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_sl2(&self) -> Mat2Z {
        debug_assert_eq!(self.det(), 1);
        Mat2Z { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn neg(&self) -> Mat2Z {
        Mat2Z { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    /// Entrywise congruence modulo `m`.
    pub fn congruent(&self, o: &Mat2Z, m: i64) -> bool {
        [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d].iter().all(|x| modp(*x, m) == 0)
    }

    pub fn to_array(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Möbius action on the upper half plane.
    pub fn act(&self, tau: Complex64) -> Complex64 {
        (tau * self.a as f64 + self.b as f64) / (tau * self.c as f64 + self.d as f64)
    }

    pub fn require_sl2(&self) -> Result<()> {
        match self.det() {
            1 => Ok(()),
            det => Err(Error::DeterminantNotOne(det)),
        }
    }
}

/// Entrywise CRT: the matrix `≡ x (mod m1)` and `≡ y (mod m2)`, entries in `[0, lcm)`.
pub fn crt_matrix(x: &Mat2Z, m1: i64, y: &Mat2Z, m2: i64) -> Result<Mat2Z> {
    let (p, q) = (x.to_array(), y.to_array());
    let mut out = [0i64; 4];
    for i in 0..4 {
        out[i] = crate::arith::crt(&[(p[i], m1), (q[i], m2)])?;
    }
    Ok(Mat2Z::new(out[0], out[1], out[2], out[3]))
}

/// A matrix of `SL₂(Z)` congruent to `target` modulo `modulus`, assuming
/// `det(target) ≡ 1 (mod modulus)`.
///
/// The bottom row starts from the residues of least absolute value and `d` is
/// moved by multiples of the modulus until the row is coprime; the top row is
/// then completed by Bézout and shifted along the bottom row.
pub fn lift_to_sl2(target: &Mat2Z, modulus: i64) -> Result<Mat2Z> {
    if modulus <= 0 || modp(target.det(), modulus) != modp(1, modulus) {
        return precondition(format!("{target:?} does not have determinant 1 modulo {modulus}"));
    }
    if modulus == 1 {
        return Ok(Mat2Z::I);
    }
    let sym = |x: i64| {
        let r = modp(x, modulus);
        if 2 * r > modulus { r - modulus } else { r }
    };
    let d0 = sym(target.d);
    let mut c = sym(target.c);
    if c == 0 && d0.abs() != 1 {
        c = modulus;
    }
    // bottom row d0, d0 − M, d0 + M, d0 − 2M, ... until coprime to c
    let d = (0..20_000i64)
        .map(|t| {
            let step = if t % 2 == 0 { t / 2 } else { -(t + 1) / 2 };
            d0 + step * modulus
        })
        .find(|&d| num_integer::gcd(c, d) == 1)
        .ok_or_else(|| Error::Precondition("no coprime bottom row found".into()))?;
    let (_, u, v) = bezout(c, d);
    // v d − (−u) c = 1
    let (a0, b0) = (v, -u);
    let (x, y) = (target.a - a0, target.b - b0);
    let s = modp(x * u + y * v, modulus);
    let lifted = Mat2Z::new(a0 + s * c, b0 + s * d, c, d);
    debug_assert_eq!(lifted.det(), 1);
    if !lifted.congruent(target, modulus) {
        return Err(Error::InconsistentCongruences(format!("lift of {target:?} modulo {modulus} failed")));
    }
    Ok(lifted)
}

/// The matrix `(M_{u,v}(σ))` with rows and columns in canonical class order.
#[derive(Debug, Clone)]
pub struct ThetaMatrix {
    pub d: u64,
    pub sigma: Mat2Z,
    /// Row-major `D × D` entries.
    pub entries: Vec<CycloNum>,
}

impl ThetaMatrix {
    pub fn get(&self, u: usize, v: usize) -> &CycloNum {
        &self.entries[u * self.d as usize + v]
    }

    /// Exact matrix product.
    pub fn mul(&self, other: &ThetaMatrix) -> ThetaMatrix {
        let n = self.d as usize;
        let entries = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (u, w) = (idx / n, idx % n);
                let mut acc = crate::cyclotomic::Accumulator::new();
                for v in 0..n {
                    acc.add_product(self.get(u, v), other.get(v, w));
                }
                acc.finish().reduced()
            })
            .collect();
        ThetaMatrix { d: self.d, sigma: self.sigma.mul(&other.sigma), entries }
    }

    /// Exact entrywise equality.
    pub fn equals(&self, other: &ThetaMatrix) -> bool {
        self.d == other.d && self.entries.par_iter().zip(other.entries.par_iter()).all(|(x, y)| x.equals(y))
    }

    /// Indices `(u, v)` of the first entry where the two matrices differ.
    pub fn first_difference(&self, other: &ThetaMatrix) -> Option<(usize, usize)> {
        let n = self.d as usize;
        (0..n * n).find(|&i| !self.entries[i].equals(&other.entries[i])).map(|i| (i / n, i % n))
    }

    /// Entries embedded in double precision.
    pub fn embedded(&self) -> Vec<Complex64> {
        self.entries.iter().map(|x| x.embed()).collect()
    }
}

/// `e[(num · den⁻¹ mod m)/m]` for `gcd(den, m) = 1`.
pub(crate) fn e_frac(num: i64, den: i64, m: i64) -> CycloNum {
    if m == 1 {
        return CycloNum::one();
    }
    let inv = mod_inv(den, m).expect("denominator must be a unit");
    CycloNum::root(modp((modp(num, m) as i128 * inv as i128 % m as i128) as i64, m), m as u64)
}

/// `δ^{mod m}_{x,y}` with the convention that it is 1 for `m ≤ 1`.
pub(crate) fn delta_mod(x: i64, y: i64, m: i64) -> bool {
    m <= 1 || modp(x - y, m) == 0
}

/// The defining exponential sum for `M(σ)`, exactly.
pub fn theta_matrix(field: &QuadField, sigma: Mat2Z) -> Result<ThetaMatrix> {
    sigma.require_sl2()?;
    let n = field.d() as usize;
    let classes = field.classes();
    let Mat2Z { a, b, c, d } = sigma;
    if c == 0 {
        let mut entries = vec![CycloNum::zero(); n * n];
        for u in classes {
            let v = field.scale_class(u, a);
            let value = CycloNum::monomial(a.signum() as i128, 1, modp(a * b * u.dnorm as i64, n as i64), n as u64);
            entries[u.index * n + v.index] = value;
        }
        return Ok(ThetaMatrix { d: field.d(), sigma, entries });
    }
    let dd = field.d() as i64;
    let cabs = c.abs();
    let order = (dd * cabs) as u64;
    let (ox, oy) = field.omega_coords();
    let pref = minus_i_over_sqrt_d(field).scale(1, c as i128);
    let coords: Vec<(i64, i64)> = classes.iter().map(|u| field.class_coords(u)).collect();
    // Exponents are tracked modulo L = 4D·D|c| in i64; the 4D divides out exactly.
    let l = 4 * dd * dd * cabs;
    let (am, dm) = (modp(a, l) as i128, modp(d, l) as i128);
    let points: Vec<Vec<(i64, i64, i64)>> = coords
        .par_iter()
        .map(|&(xu, yu)| {
            let mut pts = Vec::with_capacity((cabs * cabs) as usize);
            for alpha in 0..cabs {
                for beta in 0..cabs {
                    let x = (xu + 2 * dd * alpha + ox * beta) as i128;
                    let y = (yu + oy * beta) as i128;
                    let q = am * (x * x + dd as i128 * y * y).rem_euclid(l as i128) % l as i128;
                    pts.push((q as i64, (2 * x).rem_euclid(l as i128) as i64, (2 * dd as i128 * y).rem_euclid(l as i128) as i64));
                }
            }
            pts
        })
        .collect();
    let entries = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (xv, yv) = coords[idx % n];
            let dv = (dm * (xv as i128 * xv as i128 + dd as i128 * yv as i128 * yv as i128) % l as i128) as i64;
            let mut counts = vec![0i128; order as usize];
            for &(q, xm, ym) in &points[idx / n] {
                let num = (q - xm * xv - ym * yv + dv).rem_euclid(l);
                debug_assert_eq!(num % (4 * dd), 0);
                let k = if c > 0 { num / (4 * dd) } else { modp(-(num / (4 * dd)), order as i64) };
                counts[k as usize] += 1;
            }
            CycloNum::from_dense(order, 1, &counts).mul(&pref).reduced()
        })
        .collect();
    Ok(ThetaMatrix { d: field.d(), sigma, entries })
}

/// `M(σ)` from the closed forms valid when `c | D`, `c > 0`.
pub fn theta_matrix_closed(field: &QuadField, sigma: Mat2Z) -> Result<ThetaMatrix> {
    sigma.require_sl2()?;
    let dd = field.d() as i64;
    let Mat2Z { a, c, d, .. } = sigma;
    if c <= 0 || dd % c != 0 {
        return precondition(format!("closed form needs 0 < c | D, got c = {c}"));
    }
    let n = dd as usize;
    let classes = field.classes();
    let inv_gauss = minus_i_over_sqrt_d(field);
    let mut entries = vec![CycloNum::zero(); n * n];
    if field.e() == 0 {
        let g = gauss_sum(&field.character_on(c as u64), a);
        let pref = inv_gauss.mul(&g);
        for u in classes {
            for v in classes {
                let (ClassRep::Odd(x), ClassRep::Odd(y)) = (u.rep, v.rep) else { unreachable!() };
                let (x, y) = (x as i64, y as i64);
                if !delta_mod(x, d * y, c) {
                    continue;
                }
                let q = a * x * x - 2 * x * y + d * y * y;
                entries[u.index * n + v.index] = pref.mul(&CycloNum::root(q, (dd * c) as u64)).reduced();
            }
        }
        return Ok(ThetaMatrix { d: field.d(), sigma, entries });
    }
    Ok(even_case_table(field, sigma))
}

/// Even `D`: the case-by-case evaluation of the two one-dimensional quadratic
/// sums, organized by `f = val_2(c) ∈ {0, 1, 2, 3}`.
fn even_case_table(field: &QuadField, sigma: Mat2Z) -> ThetaMatrix {
    let dd = field.d() as i64;
    let Mat2Z { a, b, c, d } = sigma;
    let n = dd as usize;
    let f = val(2, c) as i64;
    let cp = c >> f;
    let g = gauss_sum(&field.character_on(cp as u64), a << f);
    let pref = minus_i_over_sqrt_d(field).mul(&g);
    let mut entries = vec![CycloNum::zero(); n * n];
    for u in field.classes() {
        for v in field.classes() {
            let (ClassRep::Even(x1, x2), ClassRep::Even(y1, y2)) = (u.rep, v.rep) else { unreachable!() };
            let (x1, x2, y1, y2) = (x1 as i64, x2 as i64, y1 as i64, y2 as i64);
            if !delta_mod(x2, d * y2, cp) {
                continue;
            }
            let q1 = a * x1 * x1 - 2 * x1 * y1 + d * y1 * y1;
            let q2 = a * x2 * x2 - 2 * x2 * y2 + d * y2 * y2;
            let base = pref.mul(&CycloNum::root(q2, (dd * c) as u64));
            let value = match f {
                0 => base.mul(&CycloNum::root(c * q1, 4)),
                1 => {
                    if !delta_mod(x1 - d * y1, 1, 2) || !delta_mod(x2 - d * y2, dd / 4, 2) {
                        continue;
                    }
                    base.mul(&CycloNum::root(2 * d * b * y1 * y1 + 4 * b * y1 + a * cp, 8)).scale(2, 1)
                }
                _ => {
                    if !delta_mod(x1, d * y1, 2) || !delta_mod(x2, d * y2, 1 << (f - 1)) {
                        continue;
                    }
                    let m = 1u64 << f;
                    let t1 = CycloNum::one().add(&CycloNum::root(a * cp * dd / 4 + a * cp * (x2 - d * y2), m));
                    let t2 = if f == 2 {
                        CycloNum::one().add(&CycloNum::root(a * cp, m))
                    } else {
                        CycloNum::root(a * cp, m)
                    };
                    base.mul(&CycloNum::root(d * b * y1 * y1, 4)).mul(&t1).mul(&t2).scale(1 << (f - 2), 1)
                }
            };
            entries[u.index * n + v.index] = value.reduced();
        }
    }
    ThetaMatrix { d: field.d(), sigma, entries }
}

/// Even `D`: the single displayed formula with the factor `M*_{u,v}(σ)` and the
/// convention `δ^{mod 1/2} = 1`, transcribed literally. It disagrees with the
/// defining sum (see the crate README); [`theta_matrix_closed`] uses the
/// case-by-case evaluation instead.
pub fn theta_matrix_closed_unified(field: &QuadField, sigma: Mat2Z) -> Result<ThetaMatrix> {
    sigma.require_sl2()?;
    let dd = field.d() as i64;
    let Mat2Z { a, b, c, d } = sigma;
    if field.e() == 0 || c <= 0 || dd % c != 0 {
        return precondition(format!("unified even formula needs even D and 0 < c | D, got D = {dd}, c = {c}"));
    }
    let n = dd as usize;
    let classes = field.classes();
    let inv_gauss = minus_i_over_sqrt_d(field);
    let mut entries = vec![CycloNum::zero(); n * n];
    let e = field.e() as i64;
    let dp = field.dprime() as i64;
    let f = val(2, c) as i64;
    let cp = c >> f;
    let dq = dp / cp;
    let g = gauss_sum(&field.character_on(cp as u64), a << f);
    let pref = inv_gauss.mul(&g);
    let scale_num = if f >= 2 { 1i128 << (f - 2) } else { 1 };
    let scale_den = if f >= 2 { 1i128 } else { 1 << (2 - f) };
    for u in classes {
        for v in classes {
            let (ClassRep::Even(x1, x2), ClassRep::Even(y1, y2)) = (u.rep, v.rep) else { unreachable!() };
            let (x1, x2, y1, y2) = (x1 as i64, x2 as i64, y1 as i64, y2 as i64);
            if !delta_mod(x2, d * y2, cp) || (f >= 1 && !delta_mod(x2, d * y2, 1 << (f - 1))) {
                continue;
            }
            let q1 = a * x1 * x1 - 2 * x1 * y1 + d * y1 * y1;
            let q2 = a * x2 * x2 - 2 * x2 * y2 + d * y2 * y2;
            let value = pref
                .mul(&e_frac(b * d * y2 * y2, dd / cp, cp))
                .mul(&e_frac(q2, (1 << (e + f)) * cp * cp, dq))
                .mul(&e_frac(q1, cp, 1 << (f + 2)))
                .mul(&e_frac(q2, dp * cp, 1 << (e + f)))
                .scale(scale_num, scale_den);
            entries[u.index * n + v.index] = value.reduced();
        }
    }
    Ok(ThetaMatrix { d: field.d(), sigma, entries })
}

/// A truncated theta value with a bound on the omitted tail.
#[derive(Debug, Clone, Copy)]
pub struct ThetaValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// `θ_u(τ, z, w) = Σ_{a ∈ u + O_K} e[|a|²τ + āz + aw]` over `|a| ≤ radius`.
pub fn theta_eval(field: &QuadField, u: &DiffClass, tau: Complex64, z: Complex64, w: Complex64, radius: u32) -> Result<ThetaValue> {
    if tau.im <= 0.0 {
        return precondition("theta series needs Im(τ) > 0");
    }
    let dd = field.d() as f64;
    let two_d = 2.0 * dd;
    let (xu, yu) = field.class_coords(u);
    let (ox, oy) = field.omega_coords();
    let sqrt_d = dd.sqrt();
    let r = radius as f64;
    // |a| ≥ |Im a| = |y|√D/(2D), so |β| is bounded; then α is bounded by |Re a|.
    let bmax = (r * two_d / (sqrt_d * oy as f64)).ceil() as i64 + 2;
    let amax = (r * two_d / (2.0 * dd)).ceil() as i64 + bmax + 2;
    let mut value = Complex64::new(0.0, 0.0);
    let i_tau = Complex64::new(0.0, TAU);
    for beta in -bmax..=bmax {
        for alpha in -amax..=amax {
            let x = (xu + 2 * field.d() as i64 * alpha + ox * beta) as f64;
            let y = (yu + oy * beta) as f64;
            let re = x / two_d;
            let im = y * sqrt_d / two_d;
            let norm = re * re + im * im;
            if norm > r * r {
                continue;
            }
            let av = Complex64::new(re, im);
            value += (i_tau * (tau * norm + av.conj() * z + av * w)).exp();
        }
    }
    // Tail: lattice points with |a| in [s, s+1) number at most 2π(s+2)·(2/√D)·(s+2),
    // each of size at most exp(−2π(s² Im τ − s(|z| + |w|))).
    let growth = z.norm() + w.norm();
    let mut tail = 0.0;
    for k in 0..400 {
        let s = r + k as f64;
        let count = TAU * (s + 2.0) * (s + 2.0) * 2.0 / sqrt_d;
        tail += count * (-TAU * (s * s * tau.im - s * growth)).exp();
    }
    Ok(ThetaValue { value, tail_bound: tail })
}

/// Smallest radius whose tail bound falls below `tol`.
pub fn radius_for(field: &QuadField, tau: Complex64, z: Complex64, w: Complex64, tol: f64) -> Result<u32> {
    let u = field.classes()[0];
    for r in 1..200 {
        if theta_eval_tail_only(field, &u, tau, z, w, r) < tol {
            return Ok(r);
        }
    }
    Err(Error::TailTooLarge { tail: f64::INFINITY, tolerance: tol })
}

fn theta_eval_tail_only(field: &QuadField, _u: &DiffClass, tau: Complex64, z: Complex64, w: Complex64, radius: u32) -> f64 {
    let sqrt_d = (field.d() as f64).sqrt();
    let growth = z.norm() + w.norm();
    let r = radius as f64;
    (0..400)
        .map(|k| {
            let s = r + k as f64;
            TAU * (s + 2.0) * (s + 2.0) * 2.0 / sqrt_d * (-TAU * (s * s * tau.im - s * growth)).exp()
        })
        .sum()
}

/// `(θ_u |_{1,1} σ)(τ, z, w) = (cτ+d)⁻¹ e[−czw/(cτ+d)] θ_u(στ, z/(cτ+d), w/(cτ+d))`.
pub fn theta_slash(field: &QuadField, u: &DiffClass, sigma: Mat2Z, tau: Complex64, z: Complex64, w: Complex64, tol: f64) -> Result<Complex64> {
    let j = tau * sigma.c as f64 + sigma.d as f64;
    let tau2 = sigma.act(tau);
    let (z2, w2) = (z / j, w / j);
    let r = radius_for(field, tau2, z2, w2, tol)?;
    let th = theta_eval(field, u, tau2, z2, w2, r)?;
    let phase = (Complex64::new(0.0, -TAU) * (z * w * sigma.c as f64 / j)).exp();
    Ok(th.value * phase / j)
}
