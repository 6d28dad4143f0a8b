//! The coefficient pipeline of the lift: a plus form `g` is split into theta
//! components `g_u`, turned into special Jacobi coefficients `α*`, and then into
//! the Fourier coefficients `c_F(T)` of the Hermitian Maass form and the
//! function `β` that characterizes the Maass space.
//!
//! Every value produced from a plus form is a Gaussian rational times `i√D`;
//! [`Scale`] records which of the two normalizations a series carries.

use crate::arith::divisors;
use crate::error::{precondition, Error, Result};
use crate::plusform::{gauss_int, gauss_to_complex, is_plus, GaussRat, QExpansion};
use crate::quadfield::{AlgInt, DiffClass, QuadField};
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::gcd;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The factor a stored Gaussian rational is multiplied by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    One,
    /// `i√D = G(χ_K)`.
    ISqrtD,
}

impl Scale {
    /// The factor as a complex number.
    pub fn embed(self, d: u64) -> Complex64 {
        match self {
            Scale::One => Complex64::new(1.0, 0.0),
            Scale::ISqrtD => Complex64::new(0.0, (d as f64).sqrt()),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scale::One => "1",
            Scale::ISqrtD => "i*sqrt(D)",
        }
    }
}

/// What an [`AlphaSeries`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaRole {
    /// `a_ℓ(g)` of a plus form.
    PlusCoefficients,
    /// `α*(ℓ)` of the special Jacobi form `φ_g`.
    SpecialJacobi,
    /// `α_F(n)` of a Maass form.
    Maass,
}

#[derive(Debug, Clone, PartialEq)]
enum AlphaValues {
    Table(Vec<Option<GaussRat>>),
    /// Seeded pseudo-random Gaussian rationals, generated on demand.
    Synthetic { seed: u64, bound: i64 },
}

/// A function on `Z_{≥0}` given by a finite table or by a seeded generator.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSeries {
    pub role: AlphaRole,
    pub scale: Scale,
    pub disc: u64,
    values: AlphaValues,
}

impl AlphaSeries {
    pub fn from_table(role: AlphaRole, scale: Scale, disc: u64, values: Vec<Option<GaussRat>>) -> Self {
        AlphaSeries { role, scale, disc, values: AlphaValues::Table(values) }
    }

    /// Pseudo-random values `(x + iy)/z` with `|x|, |y| ≤ bound` and `1 ≤ z ≤ 4`,
    /// a deterministic function of `(seed, n)`.
    pub fn synthetic(role: AlphaRole, disc: u64, seed: u64, bound: i64) -> Self {
        AlphaSeries { role, scale: Scale::One, disc, values: AlphaValues::Synthetic { seed, bound } }
    }

    /// Number of stored values, or `None` for a generated series.
    pub fn precision(&self) -> Option<usize> {
        match &self.values {
            AlphaValues::Table(v) => Some(v.len()),
            AlphaValues::Synthetic { .. } => None,
        }
    }

    pub fn value(&self, n: u64) -> Result<GaussRat> {
        match &self.values {
            AlphaValues::Table(v) => match v.get(n as usize) {
                None => Err(Error::Truncation { index: n, precision: v.len() as u64 }),
                Some(None) => precondition(format!("value at {n} is unspecified")),
                Some(Some(x)) => Ok(x.clone()),
            },
            AlphaValues::Synthetic { seed, bound } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let z = BigInt::from(rng.random_range(1..=4i64));
                let mut part = || BigRational::new(BigInt::from(rng.random_range(-bound..=*bound)), z.clone());
                Ok(Complex::new(part(), part()))
            }
        }
    }

    /// The value as a complex number, scale included.
    pub fn value_complex(&self, n: u64) -> Result<Complex64> {
        Ok(gauss_to_complex(&self.value(n)?) * self.scale.embed(self.disc))
    }
}

/// A theta component `g_u = i√D · Σ c_ℓ e[ℓτ/D]`; `scaled` holds the `c_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaComponent {
    pub class: DiffClass,
    pub scaled: QExpansion,
}

fn check_input(field: &QuadField, level: u64, g: &QExpansion) -> Result<i64> {
    if level == 0 || gcd(level, field.d()) != 1 {
        return precondition(format!("level N = {level} must be positive and coprime to D = {}", field.d()));
    }
    if !is_plus(field, g)? {
        return precondition("the input expansion is not a plus form");
    }
    Ok(field.chi().eval(level as i64) as i64)
}

/// `g_u = χ(N)·(−i√D/a_u)·Σ_{ℓ ≡ −D|u|² mod D} a_ℓ(g) e[ℓτ/D]` for every class `u`.
pub fn theta_decompose(field: &QuadField, level: u64, g: &QExpansion) -> Result<Vec<ThetaComponent>> {
    let chi_n = check_input(field, level, g)?;
    let d = field.d();
    Ok(field
        .classes()
        .iter()
        .map(|u| {
            let target = (d - u.dnorm) % d;
            let factor = BigRational::new(BigInt::from(-chi_n), BigInt::from(u.mult));
            let coeffs = g
                .coeffs
                .iter()
                .enumerate()
                .map(|(ell, a)| {
                    if ell as u64 % d != target {
                        return Some(gauss_int(0));
                    }
                    a.as_ref().map(|a| Complex::new(&a.re * &factor, &a.im * &factor))
                })
                .collect();
            ThetaComponent { class: *u, scaled: QExpansion::new(g.weight, g.level, d, d, coeffs) }
        })
        .collect())
}

/// `α*(ℓ) = −i√D·a_ℓ(g)/(a_D(ℓ)χ(N))`, and `0` where `a_D(ℓ) = 0`.
pub fn special_jacobi_alpha(field: &QuadField, level: u64, g: &QExpansion) -> Result<AlphaSeries> {
    let chi_n = check_input(field, level, g)?;
    let values = g
        .coeffs
        .iter()
        .enumerate()
        .map(|(ell, a)| {
            let ad = field.a_d(ell as i64);
            if ad == 0 {
                return Some(gauss_int(0));
            }
            let factor = BigRational::new(BigInt::from(-chi_n), BigInt::from(ad));
            a.as_ref().map(|a| Complex::new(&a.re * &factor, &a.im * &factor))
        })
        .collect();
    Ok(AlphaSeries::from_table(AlphaRole::SpecialJacobi, Scale::ISqrtD, field.d(), values))
}

/// The inverse map `a_ℓ = i·a_D(ℓ)/√D·χ(N)·α*(ℓ)`, giving an expansion of weight `k − 1`.
pub fn plus_coefficients(field: &QuadField, level: u64, k: i64, alpha: &AlphaSeries) -> Result<QExpansion> {
    if alpha.scale != Scale::ISqrtD {
        return precondition("α* must carry the factor i√D to give rational plus coefficients");
    }
    let len = alpha.precision().ok_or_else(|| Error::Precondition("a finite α* table is required".into()))?;
    let chi_n = field.chi().eval(level as i64) as i64;
    let coeffs = (0..len)
        .map(|ell| {
            let c = alpha.value(ell as u64).ok()?;
            // i·(i√D)/√D = −1
            let factor = BigRational::from_integer(BigInt::from(-(field.a_d(ell as i64) as i64) * chi_n));
            Some(Complex::new(&c.re * &factor, &c.im * &factor))
        })
        .collect();
    Ok(QExpansion::new(k - 1, field.d() * level, field.d(), 1, coeffs))
}

/// `T = [[ℓ, t], [t̄, m]] ∈ S₂` with `t = (i/√D)(t1 + t2 ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HermitianCoeffKey {
    pub ell: u64,
    pub m: u64,
    pub t1: i64,
    pub t2: i64,
}

impl HermitianCoeffKey {
    /// `ε(T) = gcd(ℓ, m, t1, t2)`, the largest `q` with `T/q ∈ S₂(Z)`.
    pub fn eps(&self) -> Result<u64> {
        let g = gcd(gcd(self.ell, self.m), gcd(self.t1.unsigned_abs(), self.t2.unsigned_abs()));
        if g == 0 {
            return precondition("ε is undefined for T = 0");
        }
        Ok(g)
    }

    /// `D·det T = Dℓm − |t1 + t2ω|²`; errors unless `T ≥ 0`.
    pub fn ddet(&self, field: &QuadField) -> Result<u64> {
        let v = field.d() as i128 * self.ell as i128 * self.m as i128
            - field.norm(AlgInt { a: self.t1, b: self.t2 }) as i128;
        if v < 0 {
            return precondition(format!("{self:?} is not positive semidefinite"));
        }
        Ok(v as u64)
    }
}

/// `ε(T)` of a nonzero `T ≥ 0`.
pub fn epsilon_t(key: &HermitianCoeffKey) -> Result<u64> {
    key.eps()
}

/// Exact power `base^exp` for a possibly negative exponent.
pub(crate) fn rational_power(base: u64, exp: i64) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(base));
    if exp >= 0 {
        num_traits::pow(b, exp as usize)
    } else {
        num_traits::pow(b.recip(), (-exp) as usize)
    }
}

fn scale_by(z: &GaussRat, r: &BigRational) -> GaussRat {
    Complex::new(&z.re * r, &z.im * r)
}

/// `c_F(T) = Σ_{d | ε(T), gcd(d, N) = 1} d^{k−1} α_F(D det T / d²)`, in the scale of `alpha`.
pub fn maass_coeff(field: &QuadField, level: u64, k: i64, alpha: &AlphaSeries, key: &HermitianCoeffKey) -> Result<GaussRat> {
    let eps = key.eps()?;
    let ddet = key.ddet(field)?;
    let mut total = gauss_int(0);
    for d in divisors(eps).into_iter().filter(|&d| gcd(d, level) == 1) {
        total += scale_by(&alpha.value(ddet / (d * d))?, &rational_power(d, k - 1));
    }
    Ok(total)
}

/// All keys with `ℓ, m ≤ bound` and `0 ≤ D det T ≤ max_ddet`, excluding `T = 0`.
pub fn keys_upto(field: &QuadField, bound: u64, max_ddet: u64) -> Vec<HermitianCoeffKey> {
    let d = field.d() as i64;
    let mut keys = Vec::new();
    for ell in 0..=bound {
        for m in 0..=bound {
            let top = d * ell as i64 * m as i64;
            // |t1 + t2ω|² ≤ Dℓm bounds both coordinates by 2√(Dℓm)
            let r = (2.0 * (top as f64).sqrt()).ceil() as i64 + 1;
            for t1 in -r..=r {
                for t2 in -r..=r {
                    let key = HermitianCoeffKey { ell, m, t1, t2 };
                    if key.eps().is_err() {
                        continue;
                    }
                    if let Ok(v) = key.ddet(field) {
                        if v <= max_ddet {
                            keys.push(key);
                        }
                    }
                }
            }
        }
    }
    keys
}

/// Inclusive bounds `1 ≤ u ≤ umax`, `0 ≤ d ≤ dmax` of a [`BetaTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaWindow {
    pub umax: u64,
    pub dmax: u64,
}

/// A function `β(u, d)` tabulated on a window, extended by zero to `u ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTable {
    pub k: i64,
    pub level: u64,
    pub scale: Scale,
    pub window: BetaWindow,
    values: Vec<GaussRat>,
}

impl BetaTable {
    /// Tabulates `f(u, d)` on the window.
    pub fn from_fn<F>(k: i64, level: u64, scale: Scale, window: BetaWindow, f: F) -> Result<Self>
    where
        F: Fn(u64, u64) -> Result<GaussRat> + Sync,
    {
        let rows: Result<Vec<Vec<GaussRat>>> = (1..=window.umax)
            .into_par_iter()
            .map(|u| (0..=window.dmax).map(|d| f(u, d)).collect())
            .collect();
        Ok(BetaTable { k, level, scale, window, values: rows?.into_iter().flatten().collect() })
    }

    /// `β(u, d)`; zero for `u ≤ 0`.
    pub fn get(&self, u: i64, d: u64) -> Result<GaussRat> {
        if u <= 0 {
            return Ok(gauss_int(0));
        }
        let u = u as u64;
        if u > self.window.umax || d > self.window.dmax {
            return Err(Error::OutsideWindow { u, d, umax: self.window.umax, dmax: self.window.dmax });
        }
        Ok(self.values[((u - 1) * (self.window.dmax + 1) + d) as usize].clone())
    }

    pub fn contains(&self, u: u64, d: u64) -> bool {
        (1..=self.window.umax).contains(&u) && d <= self.window.dmax
    }

    /// `self + t·other` on a common window.
    pub fn add_scaled(&self, other: &BetaTable, t: &BigRational) -> Result<BetaTable> {
        if self.window != other.window || self.scale != other.scale {
            return precondition("tables differ in window or scale");
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + scale_by(b, t)).collect();
        Ok(BetaTable { values, ..self.clone() })
    }

    /// Replaces one entry; used to exercise the condition checks.
    pub fn with_entry(&self, u: u64, d: u64, value: GaussRat) -> Result<BetaTable> {
        let _ = self.get(u as i64, d)?;
        let mut out = self.clone();
        out.values[((u - 1) * (self.window.dmax + 1) + d) as usize] = value;
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.is_zero())
    }
}

/// `β(u, v) = Σ_{d | u, gcd(d, N) = 1} d^{k−1} α_F(v (u/d)²)` on a window.
pub fn beta_from_alpha(alpha: &AlphaSeries, k: i64, level: u64, window: BetaWindow) -> Result<BetaTable> {
    BetaTable::from_fn(k, level, alpha.scale, window, |u, v| {
        let mut total = gauss_int(0);
        for d in divisors(u).into_iter().filter(|&d| gcd(d, level) == 1) {
            let q = u / d;
            total += scale_by(&alpha.value(v * q * q)?, &rational_power(d, k - 1));
        }
        Ok(total)
    })
}
