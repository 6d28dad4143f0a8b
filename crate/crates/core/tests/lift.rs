use maasslift::hecke::verify_beta_conditions;
use maasslift::lift::{
    beta_from_alpha, keys_upto, maass_coeff, plus_coefficients, special_jacobi_alpha, theta_decompose, AlphaRole,
    AlphaSeries, BetaWindow, HermitianCoeffKey, Scale,
};
use maasslift::plusform::{eisenstein_star_full, gauss_int, GaussRat, QExpansion};
use maasslift::QuadField;
use num_complex::Complex;
use num_rational::BigRational;
use std::collections::HashMap;

const DS: [u64; 10] = [3, 4, 7, 8, 11, 15, 19, 20, 23, 24];

fn field(d: u64) -> QuadField {
    QuadField::new(d).unwrap()
}

fn levels(d: u64) -> Vec<u64> {
    [1u64, 2, 5, 7].into_iter().filter(|&n| num_integer::gcd(n, d) == 1).collect()
}

/// `a_D(ℓ)` by counting classes `u` with `D|u|² ≡ −ℓ (mod D)`.
fn a_d_oracle(k: &QuadField, ell: u64) -> u64 {
    let d = k.d();
    k.classes().iter().filter(|u| (u.dnorm + ell) % d == 0).count() as u64
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn times(z: &GaussRat, r: &BigRational) -> GaussRat {
    Complex::new(&z.re * r, &z.im * r)
}

#[test]
fn alpha_matches_counting_oracle() {
    for d in DS {
        let k = field(d);
        let g = eisenstein_star_full(&k, 8, 120).unwrap();
        for n in levels(d) {
            let alpha = special_jacobi_alpha(&k, n, &g).unwrap();
            assert_eq!(alpha.scale, Scale::ISqrtD);
            let chi_n = k.chi().eval(n as i64) as i64;
            for ell in 0..=120u64 {
                let ad = a_d_oracle(&k, ell);
                let expected = if ad == 0 {
                    gauss_int(0)
                } else {
                    times(g.coeff(ell as usize).unwrap().unwrap(), &rat(-chi_n, ad as i64))
                };
                assert_eq!(alpha.value(ell).unwrap(), expected, "D={d} N={n} ℓ={ell}");
            }
        }
    }
}

#[test]
fn coefficient_round_trip_is_exact() {
    for d in DS {
        let k = field(d);
        for wt in [4i64, 8] {
            let g = eisenstein_star_full(&k, wt, 150).unwrap();
            for n in levels(d) {
                let alpha = special_jacobi_alpha(&k, n, &g).unwrap();
                let back = plus_coefficients(&k, n, wt, &alpha).unwrap();
                assert_eq!(back.coeffs, g.coeffs, "D={d} N={n} k={wt}");
                assert_eq!(back.weight, g.weight);
            }
        }
    }
}

#[test]
fn round_trip_on_a_non_eisenstein_plus_form() {
    // any expansion supported on a_D(ℓ) ≠ 0 is accepted coefficientwise
    let k = field(15);
    let coeffs: Vec<_> = (0..60i64)
        .map(|ell| {
            let on = i64::from(k.a_d(ell) != 0);
            Some(Complex::new(rat(on * (ell * ell - 7), 3), rat(on * ell, 1)))
        })
        .collect();
    let g = QExpansion::new(7, 15, 15, 1, coeffs);
    let alpha = special_jacobi_alpha(&k, 2, &g).unwrap();
    assert_eq!(plus_coefficients(&k, 2, 8, &alpha).unwrap().coeffs, g.coeffs);
}

#[test]
fn non_plus_input_is_rejected() {
    let k = field(3);
    let mut g = eisenstein_star_full(&k, 8, 20).unwrap();
    g.coeffs[1] = Some(gauss_int(1));
    assert!(special_jacobi_alpha(&k, 1, &g).is_err());
    assert!(theta_decompose(&k, 1, &g).is_err());
    assert!(special_jacobi_alpha(&k, 3, &eisenstein_star_full(&k, 8, 20).unwrap()).is_err());
}

#[test]
fn theta_components_follow_the_decomposition() {
    for d in DS {
        let k = field(d);
        let g = eisenstein_star_full(&k, 6, 90).unwrap();
        for n in levels(d) {
            let comps = theta_decompose(&k, n, &g).unwrap();
            let alpha = special_jacobi_alpha(&k, n, &g).unwrap();
            assert_eq!(comps.len() as u64, d);
            for c in &comps {
                assert_eq!(c.scaled.denom, d);
                for ell in 0..=90u64 {
                    let a = c.scaled.coeff(ell as usize).unwrap().unwrap();
                    if (ell + c.class.dnorm) % d == 0 {
                        // f_u = Σ α*(ℓ) e[ℓτ/D] on its residue class
                        assert_eq!(a, &alpha.value(ell).unwrap(), "D={d} u={:?} ℓ={ell}", c.class.rep);
                    } else {
                        assert_eq!(a, &gauss_int(0));
                    }
                }
            }
            for a in &comps {
                for b in &comps {
                    if a.class.dnorm == b.class.dnorm {
                        assert_eq!(a.scaled, b.scaled);
                    }
                }
            }
        }
    }
}

#[test]
fn d3_components_of_eisenstein() {
    let k = field(3);
    let g = eisenstein_star_full(&k, 8, 12).unwrap();
    let comps = theta_decompose(&k, 2, &g).unwrap();
    // χ(2) = −1, a_u = 2 for the classes ±1: coefficient −χ(N)·(−126)/2 = −63 times i√3
    assert_eq!(comps[1].scaled.coeff(2).unwrap(), Some(&gauss_int(-63)));
    assert_eq!(comps[2].scaled.coeff(2).unwrap(), Some(&gauss_int(-63)));
    assert_eq!(comps[0].scaled.coeff(2).unwrap(), Some(&gauss_int(0)));
    // class 0 has a_u = 1, so its coefficient at ℓ = 3 is −χ(2)·a_3 = a_3
    assert_eq!(comps[0].scaled.coeff(3).unwrap(), g.coeff(3).unwrap());
}

#[test]
fn jacobi_coefficients_depend_on_ell_minus_norm() {
    // c_φ(n, t) := α*(D(n − |t|²)) is a function of n − |t|² with t ∈ d_K⁻¹
    let k = field(7);
    let g = eisenstein_star_full(&k, 6, 200).unwrap();
    let alpha = special_jacobi_alpha(&k, 1, &g).unwrap();
    let mut seen: HashMap<i64, GaussRat> = HashMap::new();
    for n in 0..=8i64 {
        for t1 in -6..=6 {
            for t2 in -6..=6 {
                let dn = 7 * n - k.norm(maasslift::quadfield::AlgInt { a: t1, b: t2 });
                if !(0..=200).contains(&dn) {
                    continue;
                }
                let v = alpha.value(dn as u64).unwrap();
                let prev = seen.entry(dn).or_insert_with(|| v.clone());
                assert_eq!(*prev, v);
            }
        }
    }
    assert!(seen.len() > 20);
}

#[test]
fn maass_coefficient_examples() {
    let k = field(4);
    let alpha = AlphaSeries::synthetic(AlphaRole::Maass, 4, 3, 30);
    let kk = 8;
    // ε = 1: a single divisor
    let key = HermitianCoeffKey { ell: 2, m: 3, t1: 1, t2: 0 };
    assert_eq!(key.eps().unwrap(), 1);
    assert_eq!(maass_coeff(&k, 1, kk, &alpha, &key).unwrap(), alpha.value(key.ddet(&k).unwrap()).unwrap());
    // ε = 3 ∤ N: two divisors
    let key = HermitianCoeffKey { ell: 3, m: 6, t1: 3, t2: 3 };
    let dd = key.ddet(&k).unwrap();
    let expected = alpha.value(dd).unwrap() + times(&alpha.value(dd / 9).unwrap(), &rat(3i64.pow(7), 1));
    assert_eq!(maass_coeff(&k, 1, kk, &alpha, &key).unwrap(), expected);
    // ε = 3 | N: the gcd filter removes 3
    assert_eq!(maass_coeff(&k, 3, kk, &alpha, &key).unwrap(), alpha.value(dd).unwrap());
}

#[test]
fn maass_coefficients_are_well_defined() {
    for d in [3u64, 4, 8, 15] {
        let k = field(d);
        // β on u ≤ 6, d ≤ 400 reads α up to 400·6²
        let g = eisenstein_star_full(&k, 8, 400 * 36).unwrap();
        let n = levels(d)[1];
        let alpha = special_jacobi_alpha(&k, n, &g).unwrap();
        let beta = beta_from_alpha(&alpha, 8, n, BetaWindow { umax: 6, dmax: 400 }).unwrap();
        let mut classes: HashMap<(u64, u64), (usize, GaussRat)> = HashMap::new();
        for key in keys_upto(&k, 6, 400) {
            let (eps, dd) = (key.eps().unwrap(), key.ddet(&k).unwrap());
            let v = maass_coeff(&k, n, 8, &alpha, &key).unwrap();
            // c_F(T) = β(ε(T), D det T / ε(T)²)
            assert_eq!(v, beta.get(eps as i64, dd / (eps * eps)).unwrap(), "D={d} {key:?}");
            let entry = classes.entry((eps, dd)).or_insert((0, v.clone()));
            assert_eq!(entry.1, v, "D={d} {key:?}");
            entry.0 += 1;
        }
        assert!(classes.values().filter(|(c, _)| *c >= 3).count() > 20, "D={d}");
    }
}

#[test]
fn beta_conditions_hold_on_the_full_window() {
    let alpha = AlphaSeries::synthetic(AlphaRole::Maass, 7, 99, 40);
    for n in [1u64, 2, 6] {
        let beta = beta_from_alpha(&alpha, 10, n, BetaWindow { umax: 50, dmax: 200 }).unwrap();
        let report = verify_beta_conditions(&beta).unwrap();
        assert!(report.passed(), "N={n}: {:?}", report.failures);
    }
}

#[test]
fn beta_conditions_for_an_eisenstein_lift() {
    let k = field(8);
    let g = eisenstein_star_full(&k, 8, 2500).unwrap();
    let alpha = special_jacobi_alpha(&k, 3, &g).unwrap();
    let beta = beta_from_alpha(&alpha, 8, 3, BetaWindow { umax: 10, dmax: 24 }).unwrap();
    let report = verify_beta_conditions(&beta).unwrap();
    assert!(report.passed() && report.checked_iii > 0, "{:?}", report.failures);
}
