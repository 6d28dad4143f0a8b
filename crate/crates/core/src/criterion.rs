//! The arithmetic criterion for a plus form to lift to a Hermitian Jacobi form
//! of level `N`:
//!
//! `A(σ; v, w) = Σ_u M_{u,v}(σ) A_u / D = δ^{mod D}_{D|w|², D|v|²}` with
//! `A_u = Σ_{j mod D, gcd(D|w|², m) = μ} (a_w/a_u) R_σ(w, j) G(ψ_m; nc) ψ_n(a+cj) e[|u|²j − |w|²κ]`,
//!
//! together with the closed forms of `A_u` for `σ` with `c | D` and the
//! verification sweep over the representatives `σ`.

use crate::arith::{bezout, crt, divisors, mod_inv, modp, val};
use crate::charsums::gauss_sum;
use crate::cyclotomic::{Accumulator, CycloNum};
use crate::error::{precondition, Result};
use crate::quadfield::{ClassRep, DiffClass, QuadField};
use crate::thetamat::{crt_matrix, lift_to_sl2, theta_matrix, Mat2Z};
use num_complex::Complex64;
use num_integer::gcd;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;
use std::time::Instant;

/// The data attached to `σ` and `j mod D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigmaContext {
    pub sigma: Mat2Z,
    pub j: i64,
    /// `a + cj`.
    pub x: i64,
    /// `gcd(a + cj, D)`, with `gcd(0, D) = D`.
    pub mu: u64,
    /// The `μ`-component of `D`.
    pub m: u64,
    /// `D/m`.
    pub n: u64,
    /// `val_2(a + cj)` when `m ≠ μ`.
    pub f: Option<u32>,
    pub kappa: i64,
    pub lambda: i64,
}

impl SigmaContext {
    /// Replaces `κ` by `κ + n(m/μ)r`, which keeps every defining congruence.
    pub fn shift_kappa(&mut self, r: i64) {
        let step = (self.n * (self.m / self.mu)) as i64 * r;
        self.kappa += step;
        self.lambda = (self.sigma.b + self.sigma.d * self.j - self.kappa * self.x) / self.n as i64;
    }
}

/// Builds `μ, m, n, κ, λ` for `σ` and `j`.
pub fn sigma_context(field: &QuadField, sigma: Mat2Z, j: i64) -> Result<SigmaContext> {
    sigma.require_sl2()?;
    let dd = field.d();
    let Mat2Z { a, b, c, d } = sigma;
    let x = a + c * j;
    let top = b + d * j;
    let mu = gcd(x.unsigned_abs(), dd);
    let m = crate::arith::component(dd, mu);
    let n = dd / m;
    if x == 0 {
        return Ok(SigmaContext { sigma, j, x, mu, m, n, f: None, kappa: 0, lambda: top });
    }
    let mut residues = vec![(top * mod_inv(x, n as i64).expect("a + cj is a unit modulo n") % n as i64, n as i64)];
    let mut f = None;
    if m != mu {
        let fv = val(2, x);
        let shifted = top + c;
        if shifted % (1 << fv) != 0 {
            return precondition(format!("2^{fv} does not divide b + dj + c = {shifted}"));
        }
        let q = (m / mu) as i64;
        let inv = mod_inv(x >> fv, q).expect("odd part is a unit modulo m/μ");
        residues.push((modp((shifted >> fv) % q * inv, q), q));
        f = Some(fv);
    }
    let kappa = crt(&residues)?;
    let lambda = (top - kappa * x) / n as i64;
    debug_assert_eq!(top - kappa * x, lambda * n as i64);
    Ok(SigmaContext { sigma, j, x, mu, m, n, f, kappa, lambda })
}

/// `R_σ(w, j)`: `½(1 + e[−(a+cj)D|w|²/(2m)] χ_2(5 − 2nc))` if `m = 4μ`, else 1.
pub fn r_factor(field: &QuadField, ctx: &SigmaContext, w: &DiffClass) -> CycloNum {
    if ctx.m != 4 * ctx.mu {
        return CycloNum::one();
    }
    let chi2 = field.chi_2().eval(5 - 2 * ctx.n as i64 * ctx.sigma.c) as i128;
    let root = CycloNum::root(-ctx.x * w.dnorm as i64, 2 * ctx.m);
    CycloNum::one().add(&root.scale(chi2, 1)).scale(1, 2)
}

/// `gcd(D|w|², m) = μ` with `gcd(0, m) = m`.
fn admissible(ctx: &SigmaContext, w: &DiffClass) -> bool {
    gcd(w.dnorm, ctx.m) == ctx.mu
}

/// Per-`σ` cache of the contexts, Gauss sums `G(ψ_m; nc)` and signs `ψ_n(a+cj)`.
#[derive(Debug, Clone)]
pub struct InnerSums {
    field: QuadField,
    sigma: Mat2Z,
    contexts: Vec<SigmaContext>,
    gauss: Vec<CycloNum>,
    signs: Vec<i8>,
}

impl InnerSums {
    pub fn new(field: &QuadField, sigma: Mat2Z) -> Result<Self> {
        let dd = field.d() as i64;
        let contexts = (0..dd).map(|j| sigma_context(field, sigma, j)).collect::<Result<Vec<_>>>()?;
        let gauss = contexts
            .iter()
            .map(|ctx| gauss_sum(&field.character_on(ctx.m), ctx.n as i64 * sigma.c))
            .collect();
        let signs = contexts.iter().map(|ctx| field.character_on(ctx.n).eval(ctx.x)).collect();
        Ok(InnerSums { field: field.clone(), sigma, contexts, gauss, signs })
    }

    pub fn sigma(&self) -> Mat2Z {
        self.sigma
    }

    pub fn contexts(&self) -> &[SigmaContext] {
        &self.contexts
    }

    /// Moves `κ` at position `j` by `n(m/μ)r`.
    pub fn shift_kappa(&mut self, j: usize, r: i64) {
        self.contexts[j].shift_kappa(r);
    }

    /// `A_u` for a class with `D|u|² = dnorm_u` and `a_u = mult_u`.
    pub fn inner(&self, dnorm_u: u64, mult_u: u64, w: &DiffClass) -> CycloNum {
        let dd = self.field.d();
        let mut acc = Accumulator::new();
        for (k, ctx) in self.contexts.iter().enumerate() {
            if !admissible(ctx, w) {
                continue;
            }
            let phase = CycloNum::monomial(
                self.signs[k] as i128,
                1,
                dnorm_u as i64 * ctx.j - w.dnorm as i64 * ctx.kappa,
                dd,
            );
            let r = r_factor(&self.field, ctx, w);
            acc.add_product(&self.gauss[k], &phase.mul(&r));
        }
        acc.finish().scale(w.mult as i128, mult_u as i128).reduced()
    }

    /// The same sum in double precision, from the integer data only.
    pub fn inner_float(&self, dnorm_u: u64, mult_u: u64, w: &DiffClass) -> Complex64 {
        let dd = self.field.d() as f64;
        let chi2 = self.field.chi_2();
        let mut total = Complex64::new(0.0, 0.0);
        for ctx in &self.contexts {
            if !admissible(ctx, w) {
                continue;
            }
            let psi_m = self.field.character_on(ctx.m);
            let mm = psi_m.modulus() as i64;
            let g: Complex64 = (0..mm)
                .map(|t| psi_m.eval(t) as f64 * cis((t * ctx.n as i64 * self.sigma.c) as f64 / mm as f64))
                .sum();
            let r = if ctx.m == 4 * ctx.mu {
                let s = chi2.eval(5 - 2 * ctx.n as i64 * self.sigma.c) as f64;
                (Complex64::new(1.0, 0.0) + cis(-(ctx.x as f64) * w.dnorm as f64 / (2 * ctx.m) as f64) * s) * 0.5
            } else {
                Complex64::new(1.0, 0.0)
            };
            let sign = self.field.character_on(ctx.n).eval(ctx.x) as f64;
            let phase = cis((dnorm_u as f64 * ctx.j as f64 - w.dnorm as f64 * ctx.kappa as f64) / dd);
            total += g * r * phase * sign;
        }
        total * (w.mult as f64 / mult_u as f64)
    }
}

fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * t.fract())
}

/// `A_u` assembled term by term from [`sigma_context`].
pub fn inner_sum_direct(field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> Result<CycloNum> {
    Ok(InnerSums::new(field, sigma)?.inner(u.dnorm, u.mult, w))
}

fn closed_form_sigma(field: &QuadField, sigma: Mat2Z) -> Result<()> {
    sigma.require_sl2()?;
    let dd = field.d() as i64;
    if sigma.c <= 0 || dd % sigma.c != 0 {
        return precondition(format!("closed form needs 0 < c | D, got c = {}", sigma.c));
    }
    Ok(())
}

/// `Σ_{γ mod q, γ² ≡ t} e[sγ/q]`.
fn square_root_sum(t: i64, s: i64, q: i64) -> CycloNum {
    let terms = (0..q)
        .filter(|g| modp(g * g - t, q) == 0)
        .map(|g| CycloNum::root(modp(s * g, q), q as u64))
        .collect::<Vec<_>>();
    let mut acc = Accumulator::new();
    for t in &terms {
        acc.add(t);
    }
    acc.finish()
}

/// Closed form of `A_u` for `σ` with `0 < c | D`.
///
/// Odd `D`: `c δ^{mod c}_{D|u|², D|dw|²} F_u G(ψ_{D*}) ψ_c(a) e[−|w|²dh − D|u|²ah²/D*]`.
/// Even `D`: `B_u + (1 − δ_{f1,0}) C_u`.
pub fn inner_sum_closed(field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> Result<CycloNum> {
    closed_form_sigma(field, sigma)?;
    if field.e() == 0 {
        return Ok(odd_closed(field, sigma, w, u));
    }
    let ctx = EvenCaseContext::new(field, sigma, w);
    let b = ctx.b_term(field, sigma, w, u)?;
    if ctx.f1 == 0 {
        return Ok(b.reduced());
    }
    Ok(b.add(&ctx.c_term(field, sigma, w, u)?).reduced())
}

/// Even `D` only: the merged expression
/// `c' δ F K (1+χ_2(D|w|²))/(1+χ_2(D|u|²)) G(ψ_{D'/c'}; 2^{f2}c*c) ψ_{c'}(a) [E_u + (1−δ_{f1,0}) E'_u G(χ_2; D'/c')]`.
pub fn inner_sum_closed_merged(field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> Result<CycloNum> {
    closed_form_sigma(field, sigma)?;
    if field.e() == 0 {
        return precondition("the merged closed form is stated for even D");
    }
    let ctx = EvenCaseContext::new(field, sigma, w);
    let mut bracket = ctx.e_u(field, sigma, w, u);
    if ctx.f1 != 0 {
        let g2 = gauss_sum(&field.chi_2(), ctx.dq);
        bracket = bracket.add(&ctx.e_prime(field, w, u).mul(&g2));
    }
    let (num, den) = ctx.chi2_ratio(field, w, u)?;
    let value = ctx
        .common(field, sigma, w, u, ctx.cp)
        .mul(&gauss_sum(&field.character_on(ctx.dq as u64), (1 << ctx.f2) * ctx.cstar * sigma.c))
        .scale(ctx.cp as i128 * num, den)
        .mul(&bracket)
        .scale(field.character_on(ctx.cp as u64).eval(sigma.a) as i128, 1);
    Ok(value.reduced())
}

fn odd_closed(field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> CycloNum {
    let dd = field.d() as i64;
    let Mat2Z { a, b, c, d } = sigma;
    let (dnu, dnw) = (u.dnorm as i64, w.dnorm as i64);
    if modp(dnu - d * d * dnw, c) != 0 {
        return CycloNum::zero();
    }
    let dstar = dd / c;
    let h = crt(&[(b, c), (mod_inv(c, dstar).expect("c is a unit modulo D/c"), dstar)]).expect("coprime moduli");
    let ClassRep::Odd(x) = u.rep else { unreachable!("odd discriminant classes") };
    let f = square_root_sum(dnw, 2 * x as i64 * modp(h * h, dstar), dstar);
    let g = gauss_sum(&field.character_on(dstar as u64), 1);
    let sign = field.character_on(c as u64).eval(a) as i128;
    let hh = modp(h * h, dd) as i128;
    let k = (-(dnw as i128) * d as i128 * h as i128 - dnu as i128 * a as i128 * hh * c as i128).rem_euclid(dd as i128);
    f.mul(&g).mul(&CycloNum::root(k as i64, dd as u64)).scale(c as i128 * sign, 1).reduced()
}

/// The quantities of the even closed form that depend on `σ` and `w` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvenCaseContext {
    pub e: u32,
    /// `val_2(c)`.
    pub f: u32,
    /// Odd part of `c`.
    pub cp: i64,
    /// The `c`-component of `D`.
    pub cstar: i64,
    /// `D/c*`.
    pub dstar: i64,
    /// `D'/c'`.
    pub dq: i64,
    /// `val_2(D*)`: `0` if `c` is even, `e` if `c` is odd.
    pub f2: u32,
    /// `min(f2, val_2(D|w|²))`.
    pub f1: u32,
}

impl EvenCaseContext {
    pub fn new(field: &QuadField, sigma: Mat2Z, w: &DiffClass) -> Self {
        let dd = field.d() as i64;
        let e = field.e();
        let c = sigma.c;
        let f = val(2, c);
        let cp = c >> f;
        let cstar = crate::arith::component(dd as u64, c as u64) as i64;
        let dstar = dd / cstar;
        let dq = field.dprime() as i64 / cp;
        let f2 = if f == 0 { e } else { 0 };
        let f1 = f2.min(val(2, w.dnorm as i64));
        EvenCaseContext { e, f, cp, cstar, dstar, dq, f2, f1 }
    }

    /// `F_u = Σ_{γ mod D'/c', γ² ≡ D|w|²} e[2x (cc*)⁻¹ 2^{−f2} γ/(D'/c')]` with `x = x2`.
    pub fn f_u(&self, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> CycloNum {
        let ClassRep::Even(_, x2) = u.rep else { unreachable!("even discriminant classes") };
        let q = self.dq;
        if q == 1 {
            return CycloNum::one();
        }
        let inv = mod_inv(modp(sigma.c * self.cstar, q) * (1 << self.f2) % q, q).expect("unit");
        square_root_sum(w.dnorm as i64, 2 * x2 as i64 * inv % q, q)
    }

    /// `K_u`.
    pub fn k_u(&self, field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> CycloNum {
        let dd = field.d() as i64;
        let Mat2Z { a, b, c, d } = sigma;
        let (dnu, dnw) = (u.dnorm as i64, w.dnorm as i64);
        let t1 = e_frac(-modp(dnu * a % self.cp * b, self.cp), dd / self.cp, self.cp);
        let t2 = e_frac(-modp(dnu * a, self.dstar), c * self.cstar, self.dstar);
        let t3 = e_frac(-modp(dnw * d, self.dstar), c * self.cstar, self.dstar);
        t1.mul(&t2).mul(&t3)
    }

    /// `E_u`.
    pub fn e_u(&self, field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> CycloNum {
        let Mat2Z { a, b, c, d } = sigma;
        let chi2 = field.chi_2();
        let (dnu, dnw) = (u.dnorm as i64, w.dnorm as i64);
        let dp = field.dprime() as i64;
        if self.f == 0 {
            return gauss_sum(&chi2, dp * c).scale(chi2.eval(dnu + dnw) as i128, 1);
        }
        let half = 1i64 << (self.e - 1);
        if modp(dnu - dnw - c, half) != 0 {
            return CycloNum::zero();
        }
        let full = 1u64 << self.e;
        let first = CycloNum::root(-dp * dnw % full as i64 * a % full as i64 * b, full);
        let inner = CycloNum::root(dp * (dnu - dnw * (2 * b * c + 1) - dnw * c * d), full)
            .scale(chi2.eval(1 + a * c) as i128, 1);
        first.mul(&CycloNum::one().add(&inner)).scale(half as i128 * chi2.eval(a) as i128, 1)
    }

    /// `E'_u`, defined when `f1 ≥ 1`.
    pub fn e_prime(&self, field: &QuadField, w: &DiffClass, u: &DiffClass) -> CycloNum {
        let (dnu, dnw) = (u.dnorm as i64, w.dnorm as i64);
        let sign = |k: i64| if modp(k, 2) == 0 { 1 } else { -1 };
        let s = match self.e - self.f1 {
            0 => 1,
            1 => sign(dnu),
            _ if dnu % 2 == 0 => sign(dnu / 2),
            _ => sign((dnu + dnw / 2) / 2) * field.chi_2().parity() as i128,
        };
        CycloNum::from_int(s)
    }

    /// `(1 + χ_2(D|w|²), 1 + χ_2(D|u|²))`.
    fn chi2_ratio(&self, field: &QuadField, w: &DiffClass, u: &DiffClass) -> Result<(i128, i128)> {
        let chi2 = field.chi_2();
        let den = 1 + chi2.eval(u.dnorm as i64) as i128;
        if den == 0 {
            return precondition("χ_2(D|u|²) = −1 does not occur for norms");
        }
        Ok((1 + chi2.eval(w.dnorm as i64) as i128, den))
    }

    /// `δ^{mod g}_{D|u|², D|dw|²} F_u K_u`.
    fn common(&self, field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass, g: i64) -> CycloNum {
        let d = sigma.d;
        if modp(u.dnorm as i64 - d * d % g * w.dnorm as i64, g) != 0 {
            return CycloNum::zero();
        }
        self.f_u(sigma, w, u).mul(&self.k_u(field, sigma, w, u))
    }

    /// `B_u`.
    pub fn b_term(&self, field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> Result<CycloNum> {
        let (num, den) = self.chi2_ratio(field, w, u)?;
        let g = gauss_sum(&field.character_on(self.dq as u64), (1 << self.f2) * self.cstar * sigma.c);
        let sign = field.character_on(self.cp as u64).eval(sigma.a) as i128;
        Ok(self
            .common(field, sigma, w, u, self.cp)
            .mul(&self.e_u(field, sigma, w, u))
            .mul(&g)
            .scale(self.cp as i128 * num * sign, den))
    }

    /// `C_u`.
    pub fn c_term(&self, field: &QuadField, sigma: Mat2Z, w: &DiffClass, u: &DiffClass) -> Result<CycloNum> {
        let (_, den) = self.chi2_ratio(field, w, u)?;
        let g = gauss_sum(&field.character_on(self.dstar as u64), 1);
        let sign = field.character_on(sigma.c as u64).eval(sigma.a) as i128;
        Ok(self
            .common(field, sigma, w, u, sigma.c)
            .mul(&self.e_prime(field, w, u))
            .mul(&g)
            .scale(sigma.c as i128 * sign, den))
    }
}

fn e_frac(num: i64, den: i64, m: i64) -> CycloNum {
    crate::thetamat::e_frac(num, den, m)
}

/// All values `A(σ; v, w)` in row-major order `v·D + w`, exactly.
pub fn criterion_table(field: &QuadField, sigma: Mat2Z) -> Result<Vec<CycloNum>> {
    let sums = InnerSums::new(field, sigma)?;
    criterion_table_with(field, &sums)
}

/// [`criterion_table`] from precomputed (possibly `κ`-shifted) inner sums.
pub fn criterion_table_with(field: &QuadField, sums: &InnerSums) -> Result<Vec<CycloNum>> {
    let m = theta_matrix(field, sums.sigma())?;
    let n = field.d() as usize;
    let classes = field.classes();
    let mut norms: Vec<(u64, u64)> = classes.iter().map(|u| (u.dnorm, u.mult)).collect();
    norms.sort_unstable();
    norms.dedup();
    // T[k][v] = Σ_{u : D|u|² = norms[k]} M_{u,v}
    let partial: Vec<CycloNum> = (0..norms.len() * n)
        .into_par_iter()
        .map(|idx| {
            let (k, v) = (idx / n, idx % n);
            let mut acc = Accumulator::new();
            for u in classes.iter().filter(|u| u.dnorm == norms[k].0) {
                acc.add(m.get(u.index, v));
            }
            acc.finish().reduced()
        })
        .collect();
    let inner: Vec<CycloNum> = (0..norms.len() * n)
        .into_par_iter()
        .map(|idx| {
            let (k, w) = (idx / n, idx % n);
            sums.inner(norms[k].0, norms[k].1, &classes[w])
        })
        .collect();
    Ok((0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (v, w) = (idx / n, idx % n);
            let mut acc = Accumulator::new();
            for k in 0..norms.len() {
                acc.add_product(&partial[k * n + v], &inner[k * n + w]);
            }
            acc.finish().scale(1, n as i128).reduced()
        })
        .collect())
}

/// `A(σ; v, w) = Σ_u M_{u,v}(σ) A_u / D`.
pub fn criterion_lhs(field: &QuadField, sigma: Mat2Z, v: &DiffClass, w: &DiffClass) -> Result<CycloNum> {
    let m = theta_matrix(field, sigma)?;
    let sums = InnerSums::new(field, sigma)?;
    let mut acc = Accumulator::new();
    for u in field.classes() {
        acc.add_product(m.get(u.index, v.index), &sums.inner(u.dnorm, u.mult, w));
    }
    Ok(acc.finish().scale(1, field.d() as i128).reduced())
}

/// The right-hand side `δ^{mod D}_{D|w|², D|v|²}`.
pub fn criterion_rhs(v: &DiffClass, w: &DiffClass) -> bool {
    v.dnorm == w.dnorm
}

/// The table of [`criterion_table`] in double precision: the theta matrix from
/// its defining sum and the inner sums from the integer context data.
pub fn criterion_table_float(field: &QuadField, sigma: Mat2Z) -> Result<Vec<Complex64>> {
    let sums = InnerSums::new(field, sigma)?;
    let m = theta_matrix_float(field, sigma);
    let n = field.d() as usize;
    let classes = field.classes();
    let inner: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|idx| sums.inner_float(classes[idx / n].dnorm, classes[idx / n].mult, &classes[idx % n]))
        .collect();
    Ok((0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (v, w) = (idx / n, idx % n);
            (0..n).map(|u| m[u * n + v] * inner[u * n + w]).sum::<Complex64>() / n as f64
        })
        .collect())
}

fn theta_matrix_float(field: &QuadField, sigma: Mat2Z) -> Vec<Complex64> {
    let n = field.d() as usize;
    let dd = field.d() as i64;
    let classes = field.classes();
    let Mat2Z { a, b, c, d } = sigma;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    if c == 0 {
        for u in classes {
            let v = field.scale_class(u, a);
            out[u.index * n + v.index] = cis((a * b * u.dnorm as i64) as f64 / dd as f64) * a.signum() as f64;
        }
        return out;
    }
    // −i/√D = −G(χ)/D with G(χ) = i√D
    let pref = Complex64::new(0.0, -1.0 / (dd as f64).sqrt()) / c as f64;
    let (ox, oy) = field.omega_coords();
    let coords: Vec<(i64, i64)> = classes.iter().map(|u| field.class_coords(u)).collect();
    let order = dd * c.abs();
    let table: Vec<Complex64> = (0..order).map(|k| cis(k as f64 / order as f64)).collect();
    out.par_iter_mut().enumerate().for_each(|(idx, slot)| {
        let (xu, yu) = coords[idx / n];
        let (xv, yv) = coords[idx % n];
        let mut s = Complex64::new(0.0, 0.0);
        for alpha in 0..c.abs() {
            for beta in 0..c.abs() {
                let x = (xu + 2 * dd * alpha + ox * beta) as i128;
                let y = (yu + oy * beta) as i128;
                let num = a as i128 * (x * x + dd as i128 * y * y)
                    - 2 * (x * xv as i128 + dd as i128 * y * yv as i128)
                    + d as i128 * (xv as i128 * xv as i128 + dd as i128 * yv as i128 * yv as i128);
                let k = (num / (4 * dd as i128) * c.signum() as i128).rem_euclid(order as i128);
                s += table[k as usize];
            }
        }
        *slot = s * pref;
    });
    out
}

/// `σ = I` together with one `σ ∈ SL₂(Z)` for every `c | D` and every
/// `d mod D` with `gcd(c, d) = 1`, completed by Bézout.
pub fn representatives(field: &QuadField) -> Vec<Mat2Z> {
    let dd = field.d() as i64;
    let mut out = vec![Mat2Z::I];
    for c in divisors(field.d()) {
        let c = c as i64;
        for d in 0..dd {
            if gcd(c, d) != 1 {
                continue;
            }
            // a d − b c = 1
            let (_, x, y) = bezout(d, c);
            out.push(Mat2Z::new(x, -y, c, d));
        }
    }
    out
}

/// `σ_N ≡ σ (mod D)` and `σ_N ≡ I (mod N)`, so that `σ_N ∈ Γ₀(N)`.
pub fn level_lift(field: &QuadField, sigma: Mat2Z, level: u64) -> Result<Mat2Z> {
    if level == 1 {
        return Ok(sigma);
    }
    let dd = field.d() as i64;
    let target = crt_matrix(&sigma, dd, &Mat2Z::I, level as i64)?;
    lift_to_sl2(&target, dd * level as i64)
}

/// A random `γ ∈ Γ₀(modulus)` chosen so that the lower-left entry of `σγ` stays small.
pub fn random_translate(sigma: Mat2Z, modulus: i64, rng: &mut impl Rng) -> Mat2Z {
    let z: i64 = if rng.random_bool(0.5) { 1 } else { -1 };
    let centre = if sigma.c == 0 { 0 } else { -(sigma.d * modulus * z) / sigma.c };
    let mut x = centre + rng.random_range(-1..=1);
    while gcd(x, modulus) != 1 {
        x += 1;
    }
    let (_, t, yy) = bezout(x, modulus * z);
    let gamma = Mat2Z::new(x, -yy, modulus * z, t);
    debug_assert_eq!(gamma.det(), 1);
    gamma
}

/// Options for [`verify_criterion`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random `Γ₀(DN)`-translates per representative.
    pub translates: usize,
    /// Random extra `σ ∈ SL₂(Z)`; results are recorded, not asserted.
    pub extras: usize,
    /// Also evaluate in double precision and record the largest deviation.
    pub float: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, translates: 3, extras: 0, float: false }
    }
}

/// A triple `(σ, v, w)` where the criterion fails.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionFailure {
    pub sigma: [i64; 4],
    pub v: usize,
    pub w: usize,
    pub lhs_exact: String,
    pub expected: u8,
}

/// Outcome on an extra matrix outside the representative set.
#[derive(Debug, Clone, Serialize)]
pub struct ExtraRecord {
    pub sigma: [i64; 4],
    pub holds: bool,
}

/// Result of a verification sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub sigmas_checked: usize,
    pub triples_checked: usize,
    pub failure_count: usize,
    /// The first failures, with payload.
    pub failures: Vec<CriterionFailure>,
    pub extras: Vec<ExtraRecord>,
    pub float_max_error: Option<f64>,
    pub wall_time: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0 && self.float_max_error.is_none_or(|e| e < 1e-9)
    }
}

const MAX_PAYLOADS: usize = 20;

struct SigmaOutcome {
    failures: Vec<CriterionFailure>,
    failure_count: usize,
    float_error: Option<f64>,
}

fn check_sigma(field: &QuadField, sigma: Mat2Z, float: bool) -> Result<SigmaOutcome> {
    let table = criterion_table(field, sigma)?;
    let n = field.d() as usize;
    let classes = field.classes();
    let mut failures = Vec::new();
    let mut failure_count = 0;
    for (idx, value) in table.iter().enumerate() {
        let (v, w) = (idx / n, idx % n);
        let expected = criterion_rhs(&classes[v], &classes[w]) as u8;
        if !value.equals(&CycloNum::from_int(expected as i128)) {
            failure_count += 1;
            if failures.len() < MAX_PAYLOADS {
                failures.push(CriterionFailure { sigma: sigma.to_array(), v, w, lhs_exact: value.to_string(), expected });
            }
        }
    }
    let float_error = if float {
        let approx = criterion_table_float(field, sigma)?;
        Some(
            approx
                .iter()
                .enumerate()
                .map(|(idx, z)| {
                    let expected = criterion_rhs(&classes[idx / n], &classes[idx % n]) as u8 as f64;
                    (z - expected).norm()
                })
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    Ok(SigmaOutcome { failures, failure_count, float_error })
}

/// Checks `A(σ; v, w) = δ` for all `(v, w)` over the representatives, their
/// lifts to `Γ₀(N)` and random `Γ₀(DN)`-translates.
pub fn verify_criterion(field: &QuadField, level: u64, opts: VerifyOptions) -> Result<CriterionReport> {
    if level == 0 || gcd(level, field.d()) != 1 {
        return precondition(format!("level N = {level} must be positive and coprime to D = {}", field.d()));
    }
    let start = Instant::now();
    let dd = field.d() as i64;
    let modulus = dd * level as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut sigmas = Vec::new();
    for sigma in representatives(field) {
        let base = level_lift(field, sigma, level)?;
        sigmas.push(base);
        for _ in 0..opts.translates {
            sigmas.push(base.mul(&random_translate(base, modulus, &mut rng)));
        }
    }
    let extras: Vec<Mat2Z> = (0..opts.extras).map(|_| random_sl2_in_gamma0(level as i64, &mut rng)).collect();
    let outcomes = sigmas
        .par_iter()
        .map(|&s| check_sigma(field, s, opts.float))
        .collect::<Result<Vec<_>>>()?;
    let extra_records = extras
        .par_iter()
        .map(|&s| {
            check_sigma(field, s, false).map(|o| ExtraRecord { sigma: s.to_array(), holds: o.failure_count == 0 })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    let mut failure_count = 0;
    let mut float_max: Option<f64> = None;
    for o in outcomes {
        failure_count += o.failure_count;
        failures.extend(o.failures);
        if let Some(e) = o.float_error {
            float_max = Some(float_max.map_or(e, |m| m.max(e)));
        }
    }
    failures.truncate(MAX_PAYLOADS);
    let n = field.d() as usize;
    Ok(CriterionReport {
        d: field.d(),
        n: level,
        sigmas_checked: sigmas.len(),
        triples_checked: sigmas.len() * n * n,
        failure_count,
        failures,
        extras: extra_records,
        float_max_error: float_max,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// A random element of `Γ₀(N)` with small entries.
fn random_sl2_in_gamma0(level: i64, rng: &mut impl Rng) -> Mat2Z {
    loop {
        let c = level * rng.random_range(-6..=6i64);
        let d: i64 = rng.random_range(-12..=12);
        if gcd(c, d) != 1 {
            continue;
        }
        let (_, x, y) = bezout(d, c);
        return Mat2Z::new(x, -y, c, d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_examples() {
        let k3 = QuadField::new(3).unwrap();
        let ctx = sigma_context(&k3, Mat2Z::J, 1).unwrap();
        assert_eq!((ctx.x, ctx.mu, ctx.m, ctx.n, ctx.kappa, ctx.lambda), (1, 1, 1, 3, 2, -1));
        for j in 0..3 {
            let ctx = sigma_context(&k3, Mat2Z::I, j).unwrap();
            assert_eq!((ctx.mu, ctx.m, ctx.n, ctx.kappa, ctx.lambda), (1, 1, 3, j, 0));
        }
        let k4 = QuadField::new(4).unwrap();
        let ctx = sigma_context(&k4, Mat2Z::J, 0).unwrap();
        assert_eq!((ctx.x, ctx.mu, ctx.m, ctx.n, ctx.kappa, ctx.lambda), (0, 4, 4, 1, 0, -1));
    }

    #[test]
    fn r_factor_is_one_for_odd_d() {
        let k = QuadField::new(15).unwrap();
        let sigma = Mat2Z::new(2, 1, 5, 3);
        for j in 0..15 {
            let ctx = sigma_context(&k, sigma, j).unwrap();
            for w in k.classes() {
                assert!(r_factor(&k, &ctx, w).equals(&CycloNum::one()));
            }
        }
    }

    #[test]
    fn identity_inner_sum() {
        let k = QuadField::new(7).unwrap();
        for u in k.classes() {
            for w in k.classes() {
                let expected = if u.dnorm == w.dnorm { 7 * w.mult as i128 / u.mult as i128 } else { 0 };
                assert!(inner_sum_direct(&k, Mat2Z::I, w, u).unwrap().equals(&CycloNum::from_int(expected)));
            }
        }
    }

    #[test]
    fn lhs_at_identity_and_inversion() {
        let k = QuadField::new(3).unwrap();
        for sigma in [Mat2Z::I, Mat2Z::J] {
            for v in k.classes() {
                for w in k.classes() {
                    let lhs = criterion_lhs(&k, sigma, v, w).unwrap();
                    assert!(lhs.equals(&CycloNum::from_int(criterion_rhs(v, w) as i128)), "{sigma:?} {v:?} {w:?} {lhs}");
                }
            }
        }
    }

    #[test]
    fn lifts_land_in_gamma0() {
        let k = QuadField::new(8).unwrap();
        for sigma in representatives(&k) {
            let s = level_lift(&k, sigma, 5).unwrap();
            assert_eq!(s.det(), 1);
            assert!(s.congruent(&sigma, 8) && s.congruent(&Mat2Z::I, 5));
        }
    }
}
