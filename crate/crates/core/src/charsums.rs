//! Gauss sums of the quadratic characters `ψ_m`, the Gauss–Salié identity and
//! the quadratic norm sums over `O_K / N O_K`.

use crate::arith::{is_prime, mod_inv, modp};
use crate::cyclotomic::{Accumulator, CycloNum};
use crate::error::{precondition, Result};
use crate::quadfield::{AlgInt, Character, QuadField};
use num_complex::Complex64;

/// `G(ψ; b) = Σ_{a mod M} ψ(a) e[ab/M]` where `M` is the modulus of `ψ`.
pub fn gauss_sum(psi: &Character, b: i64) -> CycloNum {
    let m = psi.modulus();
    let terms = (0..m)
        .filter_map(|a| {
            let s = psi.eval(a as i64);
            (s != 0).then(|| ((modp(a as i64 * modp(b, m as i64), m as i64)) as u64, s as i128))
        })
        .collect();
    CycloNum::from_terms(m, 1, terms)
}

/// `1/G(ψ; b) = G(ψ; −b)/M`, valid for `gcd(b, M) = 1`.
pub fn gauss_sum_inverse(psi: &Character, b: i64) -> CycloNum {
    gauss_sum(psi, -b).scale(1, psi.modulus() as i128)
}

/// `G(χ_K) = i√D`.
pub fn gauss_chi(field: &QuadField) -> CycloNum {
    gauss_sum(&field.chi(), 1)
}

/// `−i/√D = 1/G(χ_K) = −G(χ_K)/D`.
pub fn minus_i_over_sqrt_d(field: &QuadField) -> CycloNum {
    gauss_chi(field).scale(-1, field.d() as i128)
}

/// Outcome of the closed-form test for `G(ψ_m) = ε(ψ_m)√m`.
#[derive(Debug, Clone)]
pub struct ClosedFormCheck {
    pub modulus: u64,
    pub epsilon_is_i: bool,
    /// `G(ψ_m)² = ψ_m(−1)·m` exactly.
    pub square_ok: bool,
    /// Distance between the embedded sum and `ε√m`.
    pub numeric_error: f64,
}

impl ClosedFormCheck {
    pub fn passed(&self) -> bool {
        self.square_ok && self.numeric_error < 1e-9
    }
}

/// Checks `G(ψ_m) = ε(ψ_m)√m` exactly through its square and numerically.
pub fn check_closed_form(psi: &Character) -> ClosedFormCheck {
    let m = psi.modulus();
    let g = gauss_sum(psi, 1);
    let square_ok = g.mul(&g).equals(&CycloNum::from_int(psi.parity() as i128 * m as i128));
    let root = (m as f64).sqrt();
    let expected = if psi.epsilon_is_i() { Complex64::new(0.0, root) } else { Complex64::new(root, 0.0) };
    ClosedFormCheck {
        modulus: m,
        epsilon_is_i: psi.epsilon_is_i(),
        square_ok,
        numeric_error: (g.embed() - expected).norm(),
    }
}

/// Both sides of the Gauss–Salié identity.
#[derive(Debug, Clone)]
pub struct SalieCheck {
    pub lhs: CycloNum,
    pub rhs: CycloNum,
    pub equal: bool,
}

/// Compares `Σ_{j=1}^{p−1} ψ(j) e[z(jx² + j⁻¹y²)/p]` with
/// `G(ψ; z)·(ψ(x²)+ψ(y²))/(1+ψ(y²))·Σ_{γ² ≡ y²} e[2xzγ/p]` for the Legendre
/// symbol `ψ` modulo an odd prime `p`.
pub fn salie_check(p: u64, x: i64, y: i64, z: i64) -> Result<SalieCheck> {
    if p % 2 == 0 || !is_prime(p) {
        return precondition(format!("{p} is not an odd prime"));
    }
    let pi = p as i64;
    if modp(z, pi) == 0 {
        return precondition(format!("{p} divides z = {z}"));
    }
    let psi = Character::legendre(p);
    let mut lhs = Accumulator::new();
    for j in 1..pi {
        let jinv = mod_inv(j, pi).expect("unit modulo a prime");
        let s = psi.eval(j);
        let k = modp(z * (modp(j * x % pi * x, pi) + modp(jinv * y % pi * y, pi)), pi);
        lhs.add(&CycloNum::monomial(s as i128, 1, k, p));
    }
    let lhs = lhs.finish();
    let px = psi.eval(x * x) as i128;
    let py = psi.eval(y * y) as i128;
    let mut sq = Accumulator::new();
    for g in 0..pi {
        if modp(g * g - y * y, pi) == 0 {
            sq.add(&CycloNum::root(modp(2 * x * z % pi * g, pi), p));
        }
    }
    let rhs = gauss_sum(&psi, z).mul(&sq.finish()).scale(px + py, 1 + py);
    let equal = lhs.equals(&rhs);
    Ok(SalieCheck { lhs, rhs, equal })
}

/// `Σ_{γ ∈ O_K/N O_K} e[t|γ|²/N]`.
pub fn norm_sum(field: &QuadField, n: u64, t: i64) -> CycloNum {
    let ni = n as i64;
    let mut counts = vec![0i128; n as usize];
    for a in 0..ni {
        for b in 0..ni {
            let k = modp(t * (field.norm(AlgInt { a, b }) % ni), ni);
            counts[k as usize] += 1;
        }
    }
    CycloNum::from_dense(n, 1, &counts)
}

/// Checks `Σ_{γ ∈ O_K/N O_K} e[t|γ|²/N] = χ(N)·N`.
pub fn norm_sum_check(field: &QuadField, n: u64, t: i64) -> Result<bool> {
    if n == 0 || num_integer::gcd(n, field.d()) != 1 {
        return precondition(format!("N = {n} must be positive and coprime to D = {}", field.d()));
    }
    if num_integer::gcd(modp(t, n as i64) as u64, n) != 1 && n > 1 {
        return precondition(format!("t = {t} must be coprime to N = {n}"));
    }
    let expected = CycloNum::from_int(field.chi().eval(n as i64) as i128 * n as i128);
    Ok(norm_sum(field, n, t).equals(&expected))
}
