//! Elliptic q-expansions with character `χ_K`, the plus-space test, the
//! Eisenstein series `E*_{k−1}`, the matrices `P_m` and numeric evaluation of
//! the slash action and of `V_m = U_m Q_m`.
//!
//! The slash action is unnormalized for every determinant:
//! `(g|γ)(τ) = (cτ + d)^{−w} g(γτ)` with `w` the weight.

use crate::arith::divisors;
use crate::error::{precondition, Error, Result};
use crate::quadfield::QuadField;
use crate::thetamat::{crt_matrix, lift_to_sl2, Mat2Z};
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::{binomial, gcd};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;
use std::str::FromStr;

/// A Gaussian rational `x + iy` with `x, y ∈ Q`.
pub type GaussRat = Complex<BigRational>;

/// Gaussian rational from an integer.
pub fn gauss_int(n: i64) -> GaussRat {
    Complex::new(BigRational::from_integer(n.into()), BigRational::zero())
}

/// Gaussian rational from a real rational.
pub fn gauss_real(x: BigRational) -> GaussRat {
    Complex::new(x, BigRational::zero())
}

/// `x + iy` embedded in double precision.
pub fn gauss_to_complex(z: &GaussRat) -> Complex64 {
    Complex64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

fn rat_to_string(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Display form `x`, `yi`, `x+yi` or `x-yi`.
pub fn gauss_to_string(z: &GaussRat) -> String {
    if z.im.is_zero() {
        return rat_to_string(&z.re);
    }
    if z.re.is_zero() {
        return format!("{}i", rat_to_string(&z.im));
    }
    let sign = if z.im.is_negative() { "-" } else { "+" };
    format!("{}{}{}i", rat_to_string(&z.re), sign, rat_to_string(&z.im.abs()))
}

/// Serialized coefficient: `null`, an integer, a rational string `"p/q"`, or
/// a pair `[re, im]` of those.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Int(i64),
    Text(String),
    Pair([Box<CoeffRepr>; 2]),
}

impl CoeffRepr {
    fn to_rational(&self) -> std::result::Result<BigRational, String> {
        match self {
            CoeffRepr::Int(n) => Ok(BigRational::from_integer((*n).into())),
            CoeffRepr::Text(s) => BigRational::from_str(s.trim()).map_err(|e| format!("bad rational {s:?}: {e}")),
            CoeffRepr::Pair(_) => Err("nested pair".into()),
        }
    }

    fn to_gauss(&self) -> std::result::Result<GaussRat, String> {
        match self {
            CoeffRepr::Pair([re, im]) => Ok(Complex::new(re.to_rational()?, im.to_rational()?)),
            other => Ok(gauss_real(other.to_rational()?)),
        }
    }

    fn from_gauss(z: &GaussRat) -> Self {
        let one = |x: &BigRational| match x.to_integer().to_i64() {
            Some(n) if x.is_integer() => CoeffRepr::Int(n),
            _ => CoeffRepr::Text(rat_to_string(x)),
        };
        if z.im.is_zero() {
            one(&z.re)
        } else {
            CoeffRepr::Pair([Box::new(one(&z.re)), Box::new(one(&z.im))])
        }
    }
}

pub(crate) fn serialize_rational<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    CoeffRepr::from_gauss(&gauss_real(x.clone())).serialize(s)
}

pub(crate) fn deserialize_rational<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
    CoeffRepr::deserialize(d)?.to_rational().map_err(serde::de::Error::custom)
}

fn serialize_coeffs<S: Serializer>(coeffs: &[Option<GaussRat>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let reprs: Vec<Option<CoeffRepr>> = coeffs.iter().map(|c| c.as_ref().map(CoeffRepr::from_gauss)).collect();
    reprs.serialize(s)
}

fn deserialize_coeffs<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Option<GaussRat>>, D::Error> {
    let reprs: Vec<Option<CoeffRepr>> = Vec::deserialize(d)?;
    reprs
        .into_iter()
        .map(|r| r.map(|r| r.to_gauss()).transpose().map_err(serde::de::Error::custom))
        .collect()
}

/// `g(τ) = Σ_ℓ a_ℓ e[ℓτ/denom]` with finitely many stored coefficients.
///
/// A coefficient stored as `None` is unspecified: it is neither zero nor
/// usable in numeric evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QExpansion {
    pub weight: i64,
    pub level: u64,
    pub disc: u64,
    pub denom: u64,
    #[serde(serialize_with = "serialize_coeffs", deserialize_with = "deserialize_coeffs")]
    pub coeffs: Vec<Option<GaussRat>>,
    pub precision: usize,
}

impl QExpansion {
    pub fn new(weight: i64, level: u64, disc: u64, denom: u64, coeffs: Vec<Option<GaussRat>>) -> Self {
        let precision = coeffs.len();
        QExpansion { weight, level, disc, denom, coeffs, precision }
    }

    /// The coefficient of `e[ℓτ/denom]`; `Ok(None)` if unspecified.
    pub fn coeff(&self, ell: usize) -> Result<Option<&GaussRat>> {
        if ell >= self.precision {
            return Err(Error::Truncation { index: ell as u64, precision: self.precision as u64 });
        }
        Ok(self.coeffs[ell].as_ref())
    }

    /// Consistency of the stored fields.
    pub fn validate(&self) -> Result<()> {
        if self.precision != self.coeffs.len() {
            return precondition(format!("precision {} but {} coefficients", self.precision, self.coeffs.len()));
        }
        if self.denom == 0 || self.level == 0 {
            return precondition("denom and level must be positive");
        }
        Ok(())
    }

    /// Termwise sum of two expansions with equal shape; the precision is the smaller one.
    pub fn add(&self, other: &QExpansion) -> Result<QExpansion> {
        if (self.weight, self.denom) != (other.weight, other.denom) {
            return precondition("expansions differ in weight or denominator");
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            })
            .collect();
        Ok(QExpansion::new(self.weight, self.level.max(other.level), self.disc, self.denom, coeffs))
    }

    /// Numeric value `Σ a_ℓ e[ℓτ/denom]` with a checked truncation tail.
    ///
    /// The tail is bounded assuming `|a_ℓ| ≤ C ℓ^{max(w,1)}` with `C` the
    /// largest ratio seen among the stored coefficients, which covers
    /// Eisenstein series and cusp forms of weight `w`.
    pub fn eval(&self, tau: Complex64) -> Result<Complex64> {
        if tau.im <= 0.0 {
            return precondition("evaluation needs Im(τ) > 0");
        }
        let scale = TAU / self.denom as f64;
        let r = (-scale * tau.im).exp();
        let growth = self.weight.max(1) as f64;
        let mut value = Complex64::new(0.0, 0.0);
        let mut c_max: f64 = 0.0;
        for (ell, a) in self.coeffs.iter().enumerate() {
            let a = a.as_ref().ok_or_else(|| {
                Error::Precondition(format!("coefficient {ell} is unspecified and cannot be evaluated"))
            })?;
            let z = gauss_to_complex(a);
            if ell > 0 {
                c_max = c_max.max(z.norm() / (ell as f64).powf(growth));
            }
            value += z * (Complex64::new(0.0, scale * ell as f64) * tau).exp();
        }
        let mut tail = 0.0;
        let p = self.precision as f64;
        for t in 0..100_000 {
            let ell = p + t as f64;
            let term = c_max * ell.powf(growth) * r.powf(ell);
            tail += term;
            if term < 1e-30 || (t > 10 && term < tail * 1e-18) {
                break;
            }
        }
        let tolerance = TAIL_TOLERANCE * value.norm().max(1.0);
        if !(tail <= tolerance) {
            return Err(Error::TailTooLarge { tail, tolerance });
        }
        Ok(value)
    }
}

/// Relative truncation tolerance of [`QExpansion::eval`].
pub const TAIL_TOLERANCE: f64 = 1e-9;

/// `a_ℓ(g) = 0` whenever `a_D(ℓ) = 0`, over the stored and specified coefficients.
///
/// Exact; unspecified coefficients are skipped.
pub fn is_plus(field: &QuadField, g: &QExpansion) -> Result<bool> {
    if g.denom != 1 {
        return precondition("the plus condition is stated for integral exponents");
    }
    Ok(g.coeffs
        .iter()
        .enumerate()
        .all(|(ell, a)| a.as_ref().is_none_or(|a| a.is_zero() || field.a_d(ell as i64) != 0)))
}

/// `a_ℓ(g) = 0` for all `ℓ` with `ψ_m(−ℓ) = −1`: the coefficient condition
/// equivalent to `g|V_m = G(ψ_m) m^{1−k} g`.
pub fn satisfies_vm_condition(field: &QuadField, g: &QExpansion, m: u64) -> Result<bool> {
    let psi = field.chi_component(m)?;
    Ok(g.coeffs
        .iter()
        .enumerate()
        .all(|(ell, a)| a.as_ref().is_none_or(|a| a.is_zero() || psi.eval(-(ell as i64)) != -1)))
}

fn check_weight(k: i64) -> Result<()> {
    if k <= 2 || k % 2 != 0 {
        return precondition(format!("k = {k} must be even and greater than 2"));
    }
    Ok(())
}

/// `E*_{k−1}` on `0 ≤ ℓ ≤ upto`: `a_ℓ = a_D(ℓ) Σ_{d | ℓ} χ(d) d^{k−2}` for
/// `gcd(ℓ, D) = 1`; every other coefficient (including `ℓ = 0`) is left unspecified.
pub fn eisenstein_star(field: &QuadField, k: i64, upto: usize) -> Result<QExpansion> {
    check_weight(k)?;
    let chi = field.chi();
    let coeffs = (0..=upto)
        .map(|ell| {
            if ell == 0 || gcd(ell as u64, field.d()) != 1 {
                return None;
            }
            let s: BigInt = divisors(ell as u64)
                .into_iter()
                .map(|d| BigInt::from(chi.eval(d as i64)) * BigInt::from(d).pow((k - 2) as u32))
                .sum();
            Some(gauss_real(BigRational::from_integer(s * BigInt::from(field.a_d(ell as i64)))))
        })
        .collect();
    Ok(QExpansion::new(k - 1, field.d(), field.d(), 1, coeffs))
}

/// Bernoulli numbers `B_0, …, B_n` with `B_1 = −1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(BigRational::one());
            continue;
        }
        // Σ_{j=0}^{m} C(m+1, j) B_j = 0
        let s: BigRational = (0..m)
            .map(|j| &b[j] * BigRational::from_integer(binomial(BigInt::from(m + 1), BigInt::from(j))))
            .sum();
        b.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

/// The generalized Bernoulli number `B_{w,χ} = M^{w−1} Σ_{a=1}^{M} χ(a) B_w(a/M)`.
pub fn generalized_bernoulli(field: &QuadField, w: usize) -> BigRational {
    let chi = field.chi();
    let m = chi.modulus() as i64;
    let b = bernoulli_numbers(w);
    let mm = BigRational::from_integer(m.into());
    let mut total = BigRational::zero();
    for a in 1..=m {
        let s = chi.eval(a);
        if s == 0 {
            continue;
        }
        let x = BigRational::new(a.into(), m.into());
        // B_w(x) = Σ_i C(w, i) B_i x^{w−i}
        let poly: BigRational = (0..=w)
            .map(|i| {
                &b[i] * BigRational::from_integer(binomial(BigInt::from(w), BigInt::from(i)))
                    * num_traits::pow(x.clone(), w - i)
            })
            .sum();
        total += poly * BigRational::from_integer(s.into());
    }
    total * num_traits::pow(mm, w - 1)
}

/// The full expansion of `E*_{k−1} = Σ_{D = mn, gcd(m,n) = 1} ψ_m(−1) E^{ψ_m,ψ_n}_{k−1}`,
/// where `E^{ψ,φ}_{w} = δ(ψ) L(1−w, φ)/2 + Σ_ℓ Σ_{d | ℓ} ψ(ℓ/d) φ(d) d^{w−1} q^ℓ`.
///
/// On `gcd(ℓ, D) = 1` it reproduces [`eisenstein_star`]; the remaining
/// coefficients come from this standard basis of Eisenstein series.
pub fn eisenstein_star_full(field: &QuadField, k: i64, upto: usize) -> Result<QExpansion> {
    check_weight(k)?;
    let dd = field.d();
    let w = (k - 1) as usize;
    let splits: Vec<u64> = divisors(dd).into_iter().filter(|&m| gcd(m, dd / m) == 1).collect();
    let mut coeffs = vec![BigRational::zero(); upto + 1];
    // constant term from m = 1: L(1−w, χ)/2 = −B_{w,χ}/(2w)
    coeffs[0] = -generalized_bernoulli(field, w) / BigRational::from_integer(BigInt::from(2 * w));
    for (ell, slot) in coeffs.iter_mut().enumerate().skip(1) {
        let mut s = BigInt::zero();
        for &m in &splits {
            let (psi, phi) = (field.character_on(m), field.character_on(dd / m));
            let eps = psi.eval(-1) as i64;
            for d in divisors(ell as u64) {
                let v = psi.eval((ell as u64 / d) as i64) as i64 * phi.eval(d as i64) as i64 * eps;
                if v != 0 {
                    s += BigInt::from(v) * BigInt::from(d).pow((w - 1) as u32);
                }
            }
        }
        *slot = BigRational::from_integer(s);
    }
    Ok(QExpansion::new(k - 1, dd, dd, 1, coeffs.into_iter().map(|c| Some(gauss_real(c))).collect()))
}

/// `P_m ∈ SL₂(Z)` with `P_m ≡ J (mod m²)` and `P_m ≡ I (mod (nN)²)`, `n = D/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PmMatrix {
    pub m: u64,
    pub n: u64,
    #[serde(rename = "N")]
    pub level: u64,
    pub matrix: Mat2Z,
}

impl PmMatrix {
    /// Re-checks `det = 1` and both congruences.
    pub fn verify(&self) -> bool {
        let (m2, r2) = ((self.m * self.m) as i64, (self.n * self.level).pow(2) as i64);
        self.matrix.det() == 1 && self.matrix.congruent(&Mat2Z::J, m2) && self.matrix.congruent(&Mat2Z::I, r2)
    }

    /// `Q_m = P_m diag(m, 1)`.
    pub fn q_matrix(&self) -> Mat2Z {
        self.matrix.mul(&Mat2Z::new(self.m as i64, 0, 0, 1))
    }
}

/// Builds `P_m` by entrywise CRT modulo `m²(nN)²` and a lift to `SL₂(Z)`.
pub fn build_pm(d: u64, m: u64, level: u64) -> Result<PmMatrix> {
    if m == 0 || d % m != 0 || gcd(m, d / m) != 1 {
        return precondition(format!("m = {m} must divide D = {d} with gcd(m, D/m) = 1"));
    }
    if level == 0 || gcd(level, d) != 1 {
        return precondition(format!("level N = {level} must be positive and coprime to D = {d}"));
    }
    let n = d / m;
    let (m2, r2) = ((m * m) as i64, (n * level).pow(2) as i64);
    let target = crt_matrix(&Mat2Z::J, m2, &Mat2Z::I, r2)?;
    let matrix = lift_to_sl2(&target, m2 * r2)?;
    let pm = PmMatrix { m, n, level, matrix };
    if !pm.verify() {
        return Err(Error::InconsistentCongruences(format!("P_m = {matrix:?} fails its congruences")));
    }
    Ok(pm)
}

/// `(g|γ)(τ) = (cτ + d)^{−w} g(γτ)` for `det γ > 0`, without normalization.
pub fn slash_eval(g: &QExpansion, gamma: Mat2Z, tau: Complex64) -> Result<Complex64> {
    if gamma.det() <= 0 {
        return precondition(format!("slash action needs det > 0, got {}", gamma.det()));
    }
    if tau.im <= 0.0 {
        return precondition("slash action needs Im(τ) > 0");
    }
    let j = tau * gamma.c as f64 + gamma.d as f64;
    Ok(g.eval(gamma.act(tau))? * j.powi(-(g.weight as i32)))
}

/// `(g|V_m)(τ)` with `g|V_m = Σ_{j mod m} g|[[1, j], [0, m]] Q_m`.
pub fn apply_vm(g: &QExpansion, field: &QuadField, m: u64, level: u64, tau: Complex64) -> Result<Complex64> {
    let q = build_pm(field.d(), m, level)?.q_matrix();
    (0..m as i64).map(|j| slash_eval(g, Mat2Z::new(1, j, 0, m as i64).mul(&q), tau)).sum()
}

/// `G(ψ_m) m^{1−k}` in double precision, the eigenvalue of `V_m` on the plus space.
pub fn vm_eigenvalue(field: &QuadField, m: u64, k: i64) -> Result<Complex64> {
    let psi = field.chi_component(m)?;
    let g = crate::charsums::gauss_sum(&psi, 1).embed();
    Ok(g * (m as f64).powi((1 - k) as i32))
}
