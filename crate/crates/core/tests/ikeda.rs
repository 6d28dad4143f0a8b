use maasslift::ikeda::{
    chi_set, fq_coeff, fstar_coeff, fstar_coeff_product, fstar_coeff_sum, fstar_plus_check, ikeda_campaign,
    local_factor, prime_subsets, rho_remark_check, star_transform, EigenData,
};
use maasslift::plusform::{gauss_int, GaussRat};
use maasslift::{Error, QuadField};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeMap;

const DS: [u64; 10] = [3, 4, 7, 8, 11, 15, 19, 20, 23, 24];

fn field(d: u64) -> QuadField {
    QuadField::new(d).unwrap()
}

fn times(z: &GaussRat, s: i64) -> GaussRat {
    let s = BigRational::from_integer(s.into());
    Complex::new(&z.re * &s, &z.im * &s)
}

fn pw(p: u64, e: u32) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(p), e as usize))
}

fn smallest_prime(n: u64) -> u64 {
    (2..=n).find(|p| n % p == 0).unwrap()
}

/// `a(n)` from `a(p)a(r) = a(pr) + χ(p)p^{w−1}a(r/p)` (second term only when
/// `p | r` and `p ∤ Dm`), peeling off the smallest prime each time.
fn oracle_coeff(ap: &BTreeMap<u64, GaussRat>, k: &QuadField, w: i64, m: u64, n: u64) -> GaussRat {
    if n == 1 {
        return gauss_int(1);
    }
    let p = smallest_prime(n);
    let r = n / p;
    let mut v = &ap[&p] * oracle_coeff(ap, k, w, m, r);
    if r % p == 0 && (k.d() * m) % p != 0 {
        let c = pw(p, w as u32 - 1) * BigRational::from_integer(k.chi().eval(p as i64).into());
        let back = oracle_coeff(ap, k, w, m, r / p);
        v -= Complex::new(&back.re * &c, &back.im * &c);
    }
    v
}

/// Prime data of `f_Q`, written out from the twist rule.
fn oracle_twist(ap: &BTreeMap<u64, GaussRat>, k: &QuadField, q_set: &[u64]) -> BTreeMap<u64, GaussRat> {
    ap.iter()
        .map(|(&p, a)| {
            let v = if q_set.contains(&p) {
                let s: i64 = k.primes().iter().filter(|q| !q_set.contains(q)).map(|&q| k.chi_p(q).eval(p as i64) as i64).product();
                times(&a.conj(), s)
            } else {
                let s: i64 = q_set.iter().map(|&q| k.chi_p(q).eval(p as i64) as i64).product();
                times(a, s)
            };
            (p, v)
        })
        .collect()
}

#[test]
fn coefficient_examples() {
    let k = field(3);
    let ed = EigenData::synthetic(&k, 7, 5, 11, 40).unwrap();
    assert_eq!(ed.coeff(&k, 1).unwrap(), gauss_int(1));
    // p = 2 ∤ 15: a(4) = a(2)² − χ(2)·2⁶, with χ(2) = −1
    let a2 = ed.ap[&2].clone();
    assert_eq!(ed.coeff(&k, 4).unwrap(), &a2 * &a2 + gauss_int(64));
    // q = 3 and q = 5 divide the level: a(q²) = a(q)²
    for q in [3u64, 5] {
        let aq = ed.ap[&q].clone();
        assert_eq!(ed.coeff(&k, q * q).unwrap(), &aq * &aq);
    }
    assert_eq!(ed.coeff(&k, 7 * 11).unwrap(), &ed.ap[&7] * &ed.ap[&11]);
    assert!(matches!(ed.coeff(&k, 43), Err(Error::MissingEigenvalue(43))));
    assert!(ed.coeff(&k, 0).is_err());
}

#[test]
fn coefficients_match_hecke_relation_oracle() {
    for d in DS {
        let k = field(d);
        for m in [1u64, 7] {
            if d % 7 == 0 {
                continue;
            }
            let ed = EigenData::synthetic(&k, 9, m, d * 31 + m, 300).unwrap();
            for n in 1..=300 {
                assert_eq!(ed.coeff(&k, n).unwrap(), oracle_coeff(&ed.ap, &k, 9, m, n), "D={d} m={m} n={n}");
            }
        }
    }
}

#[test]
fn twisted_coefficients_match_twisted_prime_data() {
    for d in DS {
        let k = field(d);
        let ed = EigenData::synthetic(&k, 7, 1, d, 300).unwrap();
        for q_set in prime_subsets(&k) {
            let ap = oracle_twist(&ed.ap, &k, &q_set);
            assert_eq!(ed.twist(&k, &q_set).unwrap().ap, ap);
            for n in 1..=300 {
                assert_eq!(
                    fq_coeff(&ed, &k, &q_set, n).unwrap(),
                    oracle_coeff(&ap, &k, 7, 1, n),
                    "D={d} Q={q_set:?} M={n}"
                );
            }
        }
    }
}

#[test]
fn twist_examples() {
    let k = field(15);
    let ed = EigenData::synthetic(&k, 7, 1, 4, 60).unwrap();
    for n in 1..=60 {
        assert_eq!(fq_coeff(&ed, &k, &[], n).unwrap(), ed.coeff(&k, n).unwrap());
    }
    // M = 7 coprime to Q: χ_Q(7)·a(7)
    let chi = chi_set(&k, &[3, 5], 7) as i64;
    assert_eq!(fq_coeff(&ed, &k, &[3, 5], 7).unwrap(), times(&ed.coeff(&k, 7).unwrap(), chi));
    // M = q ∈ Q: conj a(q) times the local factor, here χ_5(3) = −1
    assert_eq!(local_factor(&k, 3, 3), -1);
    assert_eq!(fq_coeff(&ed, &k, &[3], 3).unwrap(), times(&ed.ap[&3].conj(), -1));
    assert!(fq_coeff(&ed, &k, &[7], 3).is_err());
}

#[test]
fn star_coefficient_examples() {
    for d in DS {
        let k = field(d);
        let ed = EigenData::synthetic(&k, 7, 1, 2 * d, 100).unwrap();
        for ell in [1u64, 2].into_iter().filter(|&l| num_integer::gcd(l, d) == 1) {
            // M = 1: Σ_Q χ_Q(−ℓ) = a_D(ℓ)
            assert_eq!(fstar_coeff(&ed, &k, ell, 1).unwrap(), gauss_int(k.a_d(ell as i64) as i64));
            for m in (1..=100).filter(|&m| num_integer::gcd(m, d) == 1 && k.a_d((ell * m) as i64) == 0) {
                assert!(fstar_coeff_sum(&ed, &k, ell, m).unwrap().is_zero(), "D={d} ℓ={ell} M={m}");
            }
        }
        assert!(fstar_coeff(&ed, &k, d, 1).is_err());
    }
}

#[test]
fn subset_sum_equals_product_form() {
    for d in DS {
        let k = field(d);
        for seed in 0..2 {
            let ed = EigenData::synthetic(&k, 7, 1, 1000 + seed, 500).unwrap();
            for ell in [1u64, 2].into_iter().filter(|&l| num_integer::gcd(l, d) == 1) {
                for m in 1..=500 {
                    assert_eq!(
                        fstar_coeff_sum(&ed, &k, ell, m).unwrap(),
                        fstar_coeff_product(&ed, &k, ell, m).unwrap(),
                        "D={d} ℓ={ell} M={m}"
                    );
                }
            }
        }
    }
}

#[test]
fn star_image_is_plus() {
    for d in DS {
        let k = field(d);
        let ed = EigenData::synthetic(&k, 9, 1, 77 + d, 200).unwrap();
        assert!(fstar_plus_check(&ed, &k, 1, 200).unwrap(), "D={d}");
        if d % 2 == 1 {
            assert!(fstar_plus_check(&ed, &k, 2, 200).unwrap(), "D={d}");
        }
    }
    // with ℓ = 1 the check is plus membership of f* itself
    let k = field(7);
    let ed = EigenData::synthetic(&k, 7, 1, 3, 200).unwrap();
    let coeffs: Vec<GaussRat> = (1..=200).map(|n| fstar_coeff(&ed, &k, 1, n).unwrap()).collect();
    let ok = (1..=200).all(|n| k.a_d(n as i64) != 0 || coeffs[n - 1].is_zero());
    assert_eq!(fstar_plus_check(&ed, &k, 1, 200).unwrap(), ok);
    assert!(ok);
}

#[test]
fn unnormalized_ramified_data_is_rejected() {
    let k = field(7);
    let mut ed = EigenData::synthetic(&k, 7, 1, 3, 50).unwrap();
    ed.ap.insert(7, gauss_int(5));
    assert!(matches!(ed.validate(&k), Err(Error::Precondition(_))));
    assert!(fstar_plus_check(&ed, &k, 1, 50).is_err());
    // a(q) = 0 is allowed
    ed.ap.insert(7, gauss_int(0));
    ed.validate(&k).unwrap();
}

#[test]
fn prime_discriminant_level_one_gives_f_minus_f_rho() {
    for d in [3u64, 7, 11, 19, 23] {
        let k = field(d);
        for seed in 0..3 {
            let ed = EigenData::synthetic(&k, 7, 1, seed, 200).unwrap();
            // f_{D} = f^ρ, so f* = f_∅ − f_{D} = f − f^ρ
            let rho = ed.twist(&k, &[d]).unwrap();
            for n in 1..=200 {
                assert_eq!(rho.coeff(&k, n).unwrap(), ed.coeff(&k, n).unwrap().conj(), "D={d} n={n}");
            }
            assert!(rho_remark_check(&ed, &k, 200).unwrap());
        }
    }
    assert!(rho_remark_check(&EigenData::synthetic(&field(15), 7, 1, 0, 20).unwrap(), &field(15), 20).is_err());
}

#[test]
fn averaging_over_subsets_recovers_the_star_image() {
    for d in [4u64, 15, 20, 24] {
        let k = field(d);
        let ed = EigenData::synthetic(&k, 7, 1, 5, 150).unwrap();
        let subsets = prime_subsets(&k);
        for ell in [1u64, 7] {
            for m in 1..=150 {
                let star = fstar_coeff_sum(&ed, &k, ell, m).unwrap();
                assert_eq!(star_transform(&ed, &k, ell, m).unwrap(), star);
                // each χ_Q(−ℓ)·(f*)_Q, with (f*)_Q = Σ_{Q'} χ_{Q'}(−ℓ)(f_{Q'})_Q, is f* again
                let mut total = gauss_int(0);
                for q_set in &subsets {
                    let mut part = gauss_int(0);
                    for inner in &subsets {
                        let twisted = ed.twist(&k, inner).unwrap().twist(&k, q_set).unwrap();
                        part += times(&twisted.coeff(&k, m).unwrap(), chi_set(&k, inner, -(ell as i64)) as i64);
                    }
                    let part = times(&part, chi_set(&k, q_set, -(ell as i64)) as i64);
                    assert_eq!(part, star, "D={d} ℓ={ell} M={m} Q={q_set:?}");
                    total += part;
                }
                assert_eq!(total, times(&star, subsets.len() as i64));
            }
        }
    }
}

#[test]
fn campaign_passes() {
    let report = ikeda_campaign(&field(15), 7, 3, 9, 120, 120).unwrap();
    assert!(report.passed(), "{report:?}");
    assert_eq!(report.product_matches, 3 * 2 * 120);
    assert_eq!(report.rho_remark, None);
    let report = ikeda_campaign(&field(7), 7, 2, 9, 60, 60).unwrap();
    assert_eq!(report.rho_remark, Some(true));
}

#[test]
fn json_round_trip() {
    let k = field(4);
    let ed = EigenData::synthetic(&k, 5, 3, 8, 12).unwrap();
    let text = serde_json::to_string(&ed).unwrap();
    assert!(text.starts_with(r#"{"weight":5,"level_m":3,"ap":[{"p":2,"#), "{text}");
    let back: EigenData = serde_json::from_str(&text).unwrap();
    assert_eq!(back, ed);
    let parsed: EigenData =
        serde_json::from_str(r#"{"weight":3,"level_m":1,"ap":[{"p":2,"re":"2/1","im":0},{"p":3,"re":-1,"im":"1/2"}]}"#).unwrap();
    assert_eq!(parsed.ap[&3], Complex::new(BigRational::from_integer((-1).into()), BigRational::new(1.into(), 2.into())));
    assert!(serde_json::from_str::<EigenData>(r#"{"weight":3,"level_m":1,"ap":[{"p":2,"re":1,"im":0},{"p":2,"re":1,"im":0}]}"#).is_err());
}
