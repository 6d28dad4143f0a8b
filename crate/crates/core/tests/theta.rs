use maasslift::arith::divisors;
use maasslift::cyclotomic::CycloNum;
use maasslift::thetamat::{theta_eval, theta_matrix, theta_matrix_closed, theta_slash, Mat2Z};
use maasslift::QuadField;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sl2(rng: &mut ChaCha8Rng, bound: i64) -> Mat2Z {
    loop {
        let c = rng.random_range(-bound..=bound);
        let d = rng.random_range(-bound..=bound);
        let (g, x, y) = maasslift::arith::bezout(d, c);
        if g == 1 {
            // a d − b c = 1 with a = x, b = −y.
            let m = Mat2Z::new(x, -y, c, d);
            if m.to_array().iter().all(|e| e.abs() <= bound) {
                return m;
            }
        }
    }
}

#[test]
fn theta_matrices_form_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [3u64, 4, 7, 8] {
        let k = QuadField::new(d).unwrap();
        for _ in 0..6 {
            let s = random_sl2(&mut rng, 6);
            let t = random_sl2(&mut rng, 6);
            let lhs = theta_matrix(&k, s).unwrap().mul(&theta_matrix(&k, t).unwrap());
            let rhs = theta_matrix(&k, s.mul(&t)).unwrap();
            assert!(lhs.equals(&rhs), "D={d} {:?} {:?}", s, t);
        }
    }
}

#[test]
fn closed_form_matches_defining_sum_for_divisors() {
    for d in [3u64, 4, 7, 8, 15, 20, 24] {
        let k = QuadField::new(d).unwrap();
        for c in divisors(d) {
            for dd in 0..d as i64 {
                let (g, x, y) = maasslift::arith::bezout(dd, c as i64);
                if g != 1 {
                    continue;
                }
                let s = Mat2Z::new(x, -y, c as i64, dd);
                let direct = theta_matrix(&k, s).unwrap();
                assert!(direct.equals(&theta_matrix_closed(&k, s).unwrap()), "D={d} {:?}", s);
            }
        }
    }
}

#[test]
fn odd_closed_form_at_full_divisor() {
    // For c = D the odd closed form reduces to δ_{u,dv} e[ab|u|²] χ(d).
    let k = QuadField::new(7).unwrap();
    let s = Mat2Z::new(3, 2, 7, 5);
    let m = theta_matrix_closed(&k, s).unwrap();
    for u in k.classes() {
        for v in k.classes() {
            let expected = if k.scale_class(v, s.d) == *u {
                CycloNum::monomial(k.chi().eval(s.d) as i128, 1, s.a * s.b * u.dnorm as i64, 7)
            } else {
                CycloNum::zero()
            };
            assert!(m.get(u.index, v.index).equals(&expected));
        }
    }
}

#[test]
fn numeric_functional_equation() {
    let tau = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.1, 0.2);
    let w = Complex64::new(0.05, -0.1);
    for d in [3u64, 4, 8] {
        let k = QuadField::new(d).unwrap();
        for s in [Mat2Z::J, Mat2Z::T, Mat2Z::new(1, 0, 1, 1)] {
            let m = theta_matrix(&k, s).unwrap();
            for u in k.classes() {
                let lhs = theta_slash(&k, u, s, tau, z, w, 1e-11).unwrap();
                let mut rhs = Complex64::new(0.0, 0.0);
                for v in k.classes() {
                    let th = theta_eval(&k, v, tau, z, w, 8).unwrap();
                    assert!(th.tail_bound < 1e-9);
                    rhs += m.get(u.index, v.index).embed() * th.value;
                }
                assert!((lhs - rhs).norm() < 1e-6, "D={d} σ={:?} u={}: {lhs} vs {rhs}", s, u.index);
            }
        }
    }
}

#[test]
fn elliptic_law() {
    let k = QuadField::new(7).unwrap();
    let tau = Complex64::new(0.3, 1.2);
    let z = Complex64::new(0.1, 0.2);
    let w = Complex64::new(0.05, -0.1);
    for u in k.classes() {
        let base = theta_eval(&k, u, tau, z, w, 9).unwrap().value;
        let moved = theta_eval(&k, u, tau, z + tau, w + tau, 9).unwrap().value;
        let phase = (Complex64::new(0.0, std::f64::consts::TAU) * (tau + z + w)).exp();
        assert!((moved * phase - base).norm() < 1e-8);
    }
}
