//! Multiplicative coefficients of eigenforms, the twists `f_Q` and the star
//! map `f ↦ f*[ℓ]` onto the plus space.
//!
//! Eigenforms are emulated by their prime coefficients: the maps below are
//! coefficient-combinatorial, so their identities can be checked on synthetic
//! data. The local factor `χ̲_q(M)` at a ramified prime `q` is taken as
//! `χ_q(M/q^e)·χ'_q(q)^e` where `q^e ‖ M` and `χ'_q = χ/χ_q`. This is the
//! choice under which the twist formula agrees with the multiplicative
//! extension of the prime data of `f_Q`, and under which the subset sum
//! defining `f*[ℓ]` factors into the product form.

use crate::arith::{factorize, primes_upto};
use crate::error::{precondition, Error, Result};
use crate::plusform::{deserialize_rational, gauss_int, gauss_to_string, serialize_rational, GaussRat};
use crate::quadfield::QuadField;
use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::gcd;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A normalized eigenform of weight `w`, level `Dm` and character `χ_K`,
/// given by its prime coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "EigenRepr", try_from = "EigenRepr")]
pub struct EigenData {
    pub weight: i64,
    pub level_m: u64,
    pub ap: BTreeMap<u64, GaussRat>,
}

#[derive(Serialize, Deserialize)]
struct ApEntry {
    p: u64,
    #[serde(serialize_with = "serialize_rational", deserialize_with = "deserialize_rational")]
    re: BigRational,
    #[serde(serialize_with = "serialize_rational", deserialize_with = "deserialize_rational")]
    im: BigRational,
}

#[derive(Serialize, Deserialize)]
struct EigenRepr {
    weight: i64,
    level_m: u64,
    ap: Vec<ApEntry>,
}

impl From<EigenData> for EigenRepr {
    fn from(e: EigenData) -> Self {
        let ap = e.ap.into_iter().map(|(p, z)| ApEntry { p, re: z.re, im: z.im }).collect();
        EigenRepr { weight: e.weight, level_m: e.level_m, ap }
    }
}

impl TryFrom<EigenRepr> for EigenData {
    type Error = String;

    fn try_from(r: EigenRepr) -> std::result::Result<Self, String> {
        let mut ap = BTreeMap::new();
        for entry in r.ap {
            if ap.insert(entry.p, Complex::new(entry.re, entry.im)).is_some() {
                return Err(format!("duplicate entry for p = {}", entry.p));
            }
        }
        Ok(EigenData { weight: r.weight, level_m: r.level_m, ap })
    }
}

fn norm_sq(z: &GaussRat) -> BigRational {
    &z.re * &z.re + &z.im * &z.im
}

fn scale(z: &GaussRat, s: i64) -> GaussRat {
    let s = BigRational::from_integer(s.into());
    Complex::new(&z.re * &s, &z.im * &s)
}

fn big_pow(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// A uniformly drawn `x + iy` with `x² + y² = 1` on a small Pythagorean grid.
fn random_unit(rng: &mut ChaCha8Rng) -> GaussRat {
    let (s, t) = loop {
        let s: i64 = rng.random_range(-3..=3);
        let t: i64 = rng.random_range(0..=3);
        if s != 0 || t != 0 {
            break (s, t);
        }
    };
    let n = BigInt::from(s * s + t * t);
    Complex::new(BigRational::new((s * s - t * t).into(), n.clone()), BigRational::new((2 * s * t).into(), n))
}

impl EigenData {
    /// Synthetic eigenform data for every prime up to `prime_bound`.
    ///
    /// For `p ∤ Dm` the coefficient is an integer of size at most
    /// `2p^{(w−1)/2}`, real when `χ(p) = 1` and purely imaginary when
    /// `χ(p) = −1`, so that `conj a(p) = χ(p)a(p)` as for a genuine newform.
    /// For `q | D` it is `q^{(w−1)/2}` times a rational point of the unit
    /// circle. The weight must be odd so that `q^{(w−1)/2}` is an integer.
    pub fn synthetic(field: &QuadField, weight: i64, level_m: u64, seed: u64, prime_bound: u64) -> Result<Self> {
        if weight < 1 || weight % 2 == 0 {
            return precondition(format!("synthetic eigenforms need an odd weight, got {weight}"));
        }
        if level_m == 0 || gcd(level_m, field.d()) != 1 {
            return precondition(format!("level m = {level_m} must be positive and coprime to D = {}", field.d()));
        }
        let half = ((weight - 1) / 2) as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ap = BTreeMap::new();
        for p in primes_upto(prime_bound) {
            let value = if field.d() % p == 0 {
                let u = random_unit(&mut rng);
                let r = BigRational::from_integer(big_pow(p, half));
                Complex::new(&u.re * &r, &u.im * &r)
            } else {
                let bound = (big_pow(p, weight as u32 - 1) * 4u32).sqrt();
                let b = i64::try_from(bound).unwrap_or(i64::MAX / 2);
                let x = rng.random_range(-b..=b);
                if level_m % p != 0 && field.chi().eval(p as i64) == -1 {
                    Complex::new(BigRational::zero(), BigRational::from_integer(x.into()))
                } else {
                    gauss_int(x)
                }
            };
            ap.insert(p, value);
        }
        Ok(EigenData { weight, level_m, ap })
    }

    /// Checks the level and the normalization `|a(q)|² = q^{w−1}` at `q | D`
    /// (when `a(q) ≠ 0`).
    pub fn validate(&self, field: &QuadField) -> Result<()> {
        if self.weight < 1 {
            return precondition(format!("weight must be positive, got {}", self.weight));
        }
        if self.level_m == 0 || gcd(self.level_m, field.d()) != 1 {
            return precondition(format!("level m = {} must be positive and coprime to D = {}", self.level_m, field.d()));
        }
        for (&p, a) in &self.ap {
            if factorize(p.max(1)).factors != [(p, 1)] {
                return precondition(format!("eigenvalue key {p} is not a prime"));
            }
            if field.d() % p == 0 && !(a.re.is_zero() && a.im.is_zero()) {
                let target = BigRational::from_integer(big_pow(p, self.weight as u32 - 1));
                if norm_sq(a) != target {
                    return precondition(format!(
                        "|a({p})|² must equal {p}^{} but a({p}) = {}",
                        self.weight - 1,
                        gauss_to_string(a)
                    ));
                }
            }
        }
        Ok(())
    }

    fn level(&self, field: &QuadField) -> u64 {
        field.d() * self.level_m
    }

    /// `a(p^e)` from the Hecke recursion, or the power rule at `p | Dm`.
    pub fn prime_power_coeff(&self, field: &QuadField, p: u64, e: u32) -> Result<GaussRat> {
        let ap = self.ap.get(&p).ok_or(Error::MissingEigenvalue(p))?;
        if self.level(field) % p == 0 {
            return Ok(num_traits::pow(ap.clone(), e as usize));
        }
        let c = BigRational::from_integer(big_pow(p, self.weight as u32 - 1) * field.chi().eval(p as i64));
        if e == 0 {
            return Ok(gauss_int(1));
        }
        let (mut prev, mut cur) = (gauss_int(1), ap.clone());
        for _ in 1..e {
            let next = ap * &cur - Complex::new(&prev.re * &c, &prev.im * &c);
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// `a(M)` for `M ≥ 1`, extended multiplicatively.
    pub fn coeff(&self, field: &QuadField, m: u64) -> Result<GaussRat> {
        if m == 0 {
            return precondition("coefficients are indexed by positive integers");
        }
        factorize(m).factors.into_iter().try_fold(gauss_int(1), |acc, (p, e)| {
            Ok(acc * self.prime_power_coeff(field, p, e)?)
        })
    }

    /// The prime data of `f_Q`: `χ_Q(p)a(p)` for `p ∉ Q` and `χ'_Q(p)·conj a(p)`
    /// for `p ∈ Q`.
    pub fn twist(&self, field: &QuadField, q_set: &[u64]) -> Result<Self> {
        check_subset(field, q_set)?;
        let ap = self
            .ap
            .iter()
            .map(|(&p, a)| {
                let v = if q_set.contains(&p) {
                    scale(&a.conj(), chi_complement(field, q_set, p as i64) as i64)
                } else {
                    scale(a, chi_set(field, q_set, p as i64) as i64)
                };
                (p, v)
            })
            .collect();
        Ok(EigenData { weight: self.weight, level_m: self.level_m, ap })
    }
}

fn check_subset(field: &QuadField, q_set: &[u64]) -> Result<()> {
    for q in q_set {
        if !field.primes().contains(q) {
            return precondition(format!("{q} is not a prime divisor of D = {}", field.d()));
        }
    }
    Ok(())
}

/// All subsets of the prime divisors of `D`.
pub fn prime_subsets(field: &QuadField) -> Vec<Vec<u64>> {
    let primes = field.primes();
    (0..1usize << primes.len())
        .map(|mask| primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &q)| q).collect())
        .collect()
}

/// `χ_Q(n) = ∏_{q ∈ Q} χ_q(n)`.
pub fn chi_set(field: &QuadField, q_set: &[u64], n: i64) -> i8 {
    q_set.iter().map(|&q| field.chi_p(q).eval(n)).product()
}

/// `χ'_Q(n) = ∏_{q | D, q ∉ Q} χ_q(n)`.
pub fn chi_complement(field: &QuadField, q_set: &[u64], n: i64) -> i8 {
    field.primes().iter().filter(|q| !q_set.contains(q)).map(|&q| field.chi_p(q).eval(n)).product()
}

/// The local factor `χ̲_q(M) = χ_q(M/q^e)·χ'_q(q)^e` with `q^e ‖ M`.
pub fn local_factor(field: &QuadField, q: u64, m: u64) -> i8 {
    let mut rest = m;
    let mut e = 0u32;
    while rest % q == 0 {
        rest /= q;
        e += 1;
    }
    let away = chi_complement(field, &[q], q as i64);
    field.chi_p(q).eval(rest as i64) * away.pow(e)
}

/// The `q`-part `M_q` of `M`.
fn q_part(m: u64, q: u64) -> u64 {
    let mut part = 1;
    let mut rest = m;
    while rest % q == 0 {
        rest /= q;
        part *= q;
    }
    part
}

/// `a_{f_Q}(M) = a_f(M'M'_Q)·conj a_f(M_Q)·∏_{q ∈ Q} χ̲_q(M)`.
pub fn fq_coeff(ed: &EigenData, field: &QuadField, q_set: &[u64], m: u64) -> Result<GaussRat> {
    check_subset(field, q_set)?;
    let mq: u64 = q_set.iter().map(|&q| q_part(m, q)).product();
    let sign: i64 = q_set.iter().map(|&q| local_factor(field, q, m) as i64).product();
    Ok(scale(&(ed.coeff(field, m / mq)? * ed.coeff(field, mq)?.conj()), sign))
}

fn check_ell(field: &QuadField, ell: u64) -> Result<()> {
    if ell == 0 || gcd(ell, field.d()) != 1 {
        return precondition(format!("ℓ = {ell} must be positive and coprime to D = {}", field.d()));
    }
    Ok(())
}

/// `a_{f*[ℓ]}(M)` from the defining sum `Σ_Q χ_Q(−ℓ)·a_{f_Q}(M)`.
pub fn fstar_coeff_sum(ed: &EigenData, field: &QuadField, ell: u64, m: u64) -> Result<GaussRat> {
    check_ell(field, ell)?;
    prime_subsets(field).iter().try_fold(gauss_int(0), |acc, q_set| {
        Ok(acc + scale(&fq_coeff(ed, field, q_set, m)?, chi_set(field, q_set, -(ell as i64)) as i64))
    })
}

/// `a_{f*[ℓ]}(M)` in product form:
/// `a_f(M')·a_D(ℓM)·∏_{q | (D, M)} (a_f(M_q) + χ_q(−1)χ_q(ℓ)·conj a_f(M_q)·χ̲_q(M))`.
pub fn fstar_coeff_product(ed: &EigenData, field: &QuadField, ell: u64, m: u64) -> Result<GaussRat> {
    check_ell(field, ell)?;
    let ad = field.a_d((ell * m) as i64);
    if ad == 0 {
        // a_f(M') is still required to exist
        ed.coeff(field, m)?;
        return Ok(gauss_int(0));
    }
    let ramified: u64 = field.primes().iter().map(|&q| q_part(m, q)).product();
    let mut acc = scale(&ed.coeff(field, m / ramified)?, ad as i64);
    for &q in field.primes().iter().filter(|&&q| m % q == 0) {
        let a = ed.coeff(field, q_part(m, q))?;
        let chi = field.chi_p(q);
        let sign = chi.eval(-1) * chi.eval(ell as i64) * local_factor(field, q, m);
        acc = acc * (&a + scale(&a.conj(), sign as i64));
    }
    Ok(acc)
}

/// `a_{f*[ℓ]}(M)`, computed both ways; disagreement is an error.
pub fn fstar_coeff(ed: &EigenData, field: &QuadField, ell: u64, m: u64) -> Result<GaussRat> {
    let sum = fstar_coeff_sum(ed, field, ell, m)?;
    let product = fstar_coeff_product(ed, field, ell, m)?;
    if sum != product {
        return Err(Error::CrossCheck(format!(
            "a_f*[{ell}]({m}): subset sum {} vs product {}",
            gauss_to_string(&sum),
            gauss_to_string(&product)
        )));
    }
    Ok(sum)
}

/// Whether `f*[ℓ]|σ_ℓ` satisfies the plus condition up to `bound`: its
/// `n`-th coefficient, `a_{f*[ℓ]}(n/ℓ)` when `ℓ | n` and `0` otherwise,
/// vanishes whenever `a_D(n) = 0`. Invalid data is an error.
pub fn fstar_plus_check(ed: &EigenData, field: &QuadField, ell: u64, bound: u64) -> Result<bool> {
    ed.validate(field)?;
    check_ell(field, ell)?;
    for n in (ell..=bound).step_by(ell as usize) {
        if field.a_d(n as i64) == 0 && !fstar_coeff(ed, field, ell, n / ell)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For prime `D` and `m = 1`: whether `f*[1] = f − f^ρ` up to `bound`, with
/// `f^ρ` the form with conjugated coefficients.
pub fn rho_remark_check(ed: &EigenData, field: &QuadField, bound: u64) -> Result<bool> {
    ed.validate(field)?;
    if field.primes() != [field.d()] || ed.level_m != 1 {
        return precondition("the f − f^ρ pattern applies to prime D at level 1");
    }
    for m in 1..=bound {
        let a = ed.coeff(field, m)?;
        if fstar_coeff(ed, field, 1, m)? != &a - a.conj() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of the star-map checks over a batch of synthetic eigenforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IkedaReport {
    #[serde(rename = "D")]
    pub d: u64,
    pub weight: i64,
    pub forms: usize,
    pub seed: u64,
    /// Number of `(form, ℓ, M)` triples where the two forms of `a_{f*[ℓ]}(M)` agree.
    pub product_matches: usize,
    pub product_mismatches: Vec<String>,
    /// Forms whose `f*[ℓ]|σ_ℓ` failed the plus condition, as `(form index, ℓ)`.
    pub plus_failures: Vec<(usize, u64)>,
    /// The `f − f^ρ` check, run for prime `D` only.
    pub rho_remark: Option<bool>,
}

impl IkedaReport {
    pub fn passed(&self) -> bool {
        self.product_mismatches.is_empty() && self.plus_failures.is_empty() && self.rho_remark != Some(false)
    }
}

/// Runs the star-map checks on `forms` synthetic eigenforms of level `D`
/// (`m = 1`): product form for `M ≤ mbound` and `ℓ ∈ {1, 2}` coprime to `D`,
/// plus membership up to `plus_bound`, and the `f − f^ρ` pattern for prime `D`.
pub fn ikeda_campaign(
    field: &QuadField,
    weight: i64,
    forms: usize,
    seed: u64,
    mbound: u64,
    plus_bound: u64,
) -> Result<IkedaReport> {
    use rayon::prelude::*;
    let ells: Vec<u64> = [1u64, 2].into_iter().filter(|&l| gcd(l, field.d()) == 1).collect();
    let prime_bound = mbound.max(plus_bound);
    let per_form: Vec<Result<(usize, Vec<String>, Vec<u64>, Option<bool>)>> = (0..forms)
        .into_par_iter()
        .map(|i| {
            let ed = EigenData::synthetic(field, weight, 1, seed.wrapping_add(i as u64), prime_bound)?;
            ed.validate(field)?;
            let (mut matches, mut mismatches, mut plus) = (0, Vec::new(), Vec::new());
            for &ell in &ells {
                for m in 1..=mbound {
                    match fstar_coeff(&ed, field, ell, m) {
                        Ok(_) => matches += 1,
                        Err(Error::CrossCheck(msg)) => mismatches.push(format!("form {i}: {msg}")),
                        Err(e) => return Err(e),
                    }
                }
                if !fstar_plus_check(&ed, field, ell, plus_bound)? {
                    plus.push(ell);
                }
            }
            let rho = if field.primes() == [field.d()] { Some(rho_remark_check(&ed, field, mbound)?) } else { None };
            Ok((matches, mismatches, plus, rho))
        })
        .collect();
    let mut report = IkedaReport {
        d: field.d(),
        weight,
        forms,
        seed,
        product_matches: 0,
        product_mismatches: Vec::new(),
        plus_failures: Vec::new(),
        rho_remark: None,
    };
    for (i, r) in per_form.into_iter().enumerate() {
        let (matches, mismatches, plus, rho) = r?;
        report.product_matches += matches;
        report.product_mismatches.extend(mismatches);
        report.plus_failures.extend(plus.into_iter().map(|ell| (i, ell)));
        if let Some(ok) = rho {
            report.rho_remark = Some(report.rho_remark.unwrap_or(true) && ok);
        }
    }
    Ok(report)
}

/// `Σ_Q χ_Q(−ℓ)·a_{g_Q}(M)` for a form given by its prime data: the
/// transform used in the surjectivity argument.
pub fn star_transform(ed: &EigenData, field: &QuadField, ell: u64, m: u64) -> Result<GaussRat> {
    check_ell(field, ell)?;
    prime_subsets(field).iter().try_fold(gauss_int(0), |acc, q_set| {
        let twisted = ed.twist(field, q_set)?;
        Ok(acc + scale(&twisted.coeff(field, m)?, chi_set(field, q_set, -(ell as i64)) as i64))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_of_two_primes() {
        let k = QuadField::new(15).unwrap();
        assert_eq!(prime_subsets(&k), vec![vec![], vec![3], vec![5], vec![3, 5]]);
    }

    #[test]
    fn local_factor_on_prime_to_q_part() {
        let k = QuadField::new(15).unwrap();
        // χ_3(2) = −1 and χ'_3(3) = χ_5(3) = −1
        assert_eq!(local_factor(&k, 3, 2), -1);
        assert_eq!(local_factor(&k, 3, 3), -1);
        assert_eq!(local_factor(&k, 3, 9), 1);
        assert_eq!(local_factor(&k, 3, 6), 1);
    }

    #[test]
    fn synthetic_data_is_valid() {
        for d in [3u64, 4, 15, 24] {
            let k = QuadField::new(d).unwrap();
            let ed = EigenData::synthetic(&k, 7, 1, 5, 50).unwrap();
            ed.validate(&k).unwrap();
        }
        let k = QuadField::new(3).unwrap();
        assert!(EigenData::synthetic(&k, 6, 1, 5, 50).is_err());
        assert!(EigenData::synthetic(&k, 7, 3, 5, 50).is_err());
    }
}
