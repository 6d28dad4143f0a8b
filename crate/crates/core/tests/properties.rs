use maasslift::arith::{bezout, crt, factorize, kronecker, modp};
use maasslift::charsums::gauss_sum;
use maasslift::criterion::level_lift;
use maasslift::hecke::{beta_tp, verify_beta_conditions};
use maasslift::ikeda::{chi_set, fq_coeff, fstar_coeff_product, fstar_coeff_sum, prime_subsets, EigenData};
use maasslift::lift::{beta_from_alpha, plus_coefficients, special_jacobi_alpha, AlphaRole, AlphaSeries, BetaWindow};
use maasslift::plusform::{GaussRat, QExpansion};
use maasslift::quadfield::AlgInt;
use maasslift::thetamat::{lift_to_sl2, Mat2Z};
use maasslift::{CycloNum, QuadField};
use num_complex::Complex;
use num_rational::BigRational;
use proptest::prelude::*;

const DS: [u64; 10] = [3, 4, 7, 8, 11, 15, 19, 20, 23, 24];

fn any_field() -> impl Strategy<Value = QuadField> {
    prop::sample::select(DS.to_vec()).prop_map(|d| QuadField::new(d).unwrap())
}

fn cyclo(order: u64) -> impl Strategy<Value = CycloNum> {
    prop::collection::vec((0..order, -5i128..=5), 0..6)
        .prop_map(move |terms| CycloNum::from_terms(order, 1, terms))
}

fn gauss(re: i64, im: i64, den: i64) -> GaussRat {
    Complex::new(BigRational::new(re.into(), den.into()), BigRational::new(im.into(), den.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorization_multiplies_back(n in 1u64..200_000) {
        let f = factorize(n);
        prop_assert_eq!(f.factors.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
        prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn kronecker_is_multiplicative_in_the_top(a in -60i64..60, b in -60i64..60, n in 1i64..80) {
        let ab = kronecker(a * b, n).unwrap();
        prop_assert_eq!(ab, kronecker(a, n).unwrap() * kronecker(b, n).unwrap());
    }

    #[test]
    fn bezout_and_crt(a in 1i64..500, b in 1i64..500, x in 0i64..1000, y in 0i64..1000) {
        let (g, s, t) = bezout(a, b);
        prop_assert_eq!(a * s + b * t, g);
        prop_assert_eq!(g, num_integer::gcd(a, b));
        if g == 1 {
            let r = crt(&[(x, a), (y, b)]).unwrap();
            prop_assert_eq!((modp(r - x, a), modp(r - y, b)), (0, 0));
        }
    }

    #[test]
    fn cyclotomic_ring_laws(x in cyclo(12), y in cyclo(12), z in cyclo(8)) {
        prop_assert!(x.add(&y).equals(&y.add(&x)));
        prop_assert!(x.mul(&y).equals(&y.mul(&x)));
        prop_assert!(x.mul(&y.add(&z)).equals(&x.mul(&y).add(&x.mul(&z))));
        prop_assert!(x.sub(&x).is_zero());
        let e = x.mul(&z).embed() - x.embed() * z.embed();
        prop_assert!(e.norm() < 1e-9);
        prop_assert!(x.reduced().equals(&x));
    }

    #[test]
    fn norm_is_multiplicative(k in any_field(), a in -20i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20) {
        let (x, y) = (AlgInt { a, b }, AlgInt { a: c, b: d });
        prop_assert_eq!(k.norm(k.mul(x, y)), k.norm(x) * k.norm(y));
        prop_assert_eq!(k.mul(x, k.conj(x)), AlgInt::from_int(k.norm(x)));
    }

    #[test]
    fn a_d_counts_classes(k in any_field(), ell in -200i64..200) {
        let d = k.d() as i64;
        let count = k.classes().iter().filter(|u| modp(u.dnorm as i64 + ell, d) == 0).count() as u64;
        prop_assert_eq!(k.a_d(ell), count);
    }

    #[test]
    fn twisted_gauss_sum(k in any_field(), b in 1i64..200) {
        // G(ψ; b) = ψ(b)·G(ψ; 1) for b prime to the modulus
        let psi = k.chi();
        let m = psi.modulus() as i64;
        prop_assume!(num_integer::gcd(b, m) == 1);
        let lhs = gauss_sum(&psi, b);
        let rhs = gauss_sum(&psi, 1).scale(psi.eval(b) as i128, 1);
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn level_lift_congruences(k in any_field(), n in prop::sample::select(vec![1u64, 2, 5, 7, 11]), c in 1i64..30, d in -30i64..30) {
        prop_assume!(num_integer::gcd(n, k.d()) == 1 && num_integer::gcd(c, d) == 1);
        let (_, x, y) = bezout(d, c);
        let sigma = Mat2Z::new(x, -y, c, d);
        let lifted = level_lift(&k, sigma, n).unwrap();
        prop_assert_eq!(lifted.det(), 1);
        prop_assert!(lifted.congruent(&sigma, k.d() as i64));
        prop_assert!(lifted.congruent(&Mat2Z::I, n as i64));
    }

    #[test]
    fn sl2_lift_of_unit_determinant(m in 2i64..60, a in 0i64..60, b in 0i64..60, c in 0i64..60) {
        // complete a, b, c modulo m to a determinant one residue matrix when possible
        let (a, b, c) = (modp(a, m), modp(b, m), modp(c, m));
        prop_assume!(num_integer::gcd(a, m) == 1);
        let ainv = maasslift::arith::mod_inv(a, m).unwrap();
        let d = modp((1 + b * c) * ainv, m);
        let target = Mat2Z::new(a, b, c, d);
        let lifted = lift_to_sl2(&target, m).unwrap();
        prop_assert_eq!(lifted.det(), 1);
        prop_assert!(lifted.congruent(&target, m));
    }

    #[test]
    fn plus_round_trip(k in any_field(), seed in any::<u64>(), level in prop::sample::select(vec![1u64, 2, 5, 7])) {
        prop_assume!(num_integer::gcd(level, k.d()) == 1);
        let alpha = AlphaSeries::synthetic(AlphaRole::PlusCoefficients, k.d(), seed, 30);
        let coeffs: Vec<_> = (0..40i64)
            .map(|ell| {
                let v = alpha.value(ell as u64).unwrap();
                Some(if k.a_d(ell) == 0 { gauss(0, 0, 1) } else { v })
            })
            .collect();
        let g = QExpansion::new(7, k.d() * level, k.d(), 1, coeffs);
        let a = special_jacobi_alpha(&k, level, &g).unwrap();
        prop_assert_eq!(plus_coefficients(&k, level, 8, &a).unwrap().coeffs, g.coeffs);
    }

    #[test]
    fn expansion_json_round_trip(values in prop::collection::vec(prop::option::of((-50i64..50, -50i64..50, 1i64..9)), 1..20)) {
        let coeffs: Vec<_> = values.iter().map(|v| v.map(|(re, im, den)| gauss(re, im, den))).collect();
        let g = QExpansion::new(5, 4, 4, 1, coeffs);
        let text = serde_json::to_string(&g).unwrap();
        prop_assert_eq!(serde_json::from_str::<QExpansion>(&text).unwrap(), g);
    }

    #[test]
    fn eigen_json_round_trip(k in any_field(), seed in any::<u64>()) {
        let ed = EigenData::synthetic(&k, 7, 1, seed, 40).unwrap();
        let text = serde_json::to_string(&ed).unwrap();
        prop_assert_eq!(serde_json::from_str::<EigenData>(&text).unwrap(), ed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigen_coefficients_are_multiplicative(k in any_field(), seed in any::<u64>(), a in 1u64..60, b in 1u64..60) {
        prop_assume!(num_integer::gcd(a, b) == 1);
        let ed = EigenData::synthetic(&k, 9, 1, seed, 60).unwrap();
        prop_assert_eq!(ed.coeff(&k, a * b).unwrap(), ed.coeff(&k, a).unwrap() * ed.coeff(&k, b).unwrap());
    }

    #[test]
    fn twists_compose_by_symmetric_difference(k in any_field(), seed in any::<u64>(), i in 0usize..4, j in 0usize..4) {
        let subsets = prime_subsets(&k);
        let (q1, q2) = (&subsets[i % subsets.len()], &subsets[j % subsets.len()]);
        let sym: Vec<u64> = k.primes().iter().copied().filter(|p| q1.contains(p) != q2.contains(p)).collect();
        let ed = EigenData::synthetic(&k, 7, 1, seed, 60).unwrap();
        let twice = ed.twist(&k, q1).unwrap().twist(&k, q2).unwrap();
        prop_assert_eq!(twice, ed.twist(&k, &sym).unwrap());
    }

    #[test]
    fn star_sum_matches_product(k in any_field(), seed in any::<u64>(), m in 1u64..600, ell in prop::sample::select(vec![1u64, 2, 7, 11])) {
        prop_assume!(num_integer::gcd(ell, k.d()) == 1);
        let ed = EigenData::synthetic(&k, 7, 1, seed, 600).unwrap();
        prop_assert_eq!(fstar_coeff_sum(&ed, &k, ell, m).unwrap(), fstar_coeff_product(&ed, &k, ell, m).unwrap());
    }

    #[test]
    fn twist_on_coprime_indices(k in any_field(), seed in any::<u64>(), m in 1u64..300, i in 0usize..4) {
        prop_assume!(num_integer::gcd(m, k.d()) == 1);
        let subsets = prime_subsets(&k);
        let q = &subsets[i % subsets.len()];
        let ed = EigenData::synthetic(&k, 7, 1, seed, 300).unwrap();
        let chi = BigRational::from_integer((chi_set(&k, q, m as i64) as i64).into());
        let a = ed.coeff(&k, m).unwrap();
        prop_assert_eq!(fq_coeff(&ed, &k, q, m).unwrap(), Complex::new(&a.re * &chi, &a.im * &chi));
    }

    #[test]
    fn hecke_image_of_random_beta(seed in any::<u64>(), level in prop::sample::select(vec![1u64, 5]), k8 in prop::bool::ANY) {
        let k = QuadField::new(3).unwrap();
        let weight = if k8 { 8 } else { 12 };
        let alpha = AlphaSeries::synthetic(AlphaRole::Maass, 3, seed, 10);
        let beta = beta_from_alpha(&alpha, weight, level, BetaWindow { umax: 24, dmax: 80 }).unwrap();
        prop_assert!(verify_beta_conditions(&beta).unwrap().passed());
        let image = beta_tp(&beta, &k, 2).unwrap();
        prop_assert!(verify_beta_conditions(&image).unwrap().passed());
    }
}
