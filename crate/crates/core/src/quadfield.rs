//! The imaginary quadratic field `K = Q(√−D)`, the classes of
//! `[d_K] = (i/√D)·O_K / O_K`, the local characters `χ_p` and `a_D`.

use crate::arith::{factorize, jacobi, kronecker, modp, val};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which integral basis `{1, ω}` the field uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaKind {
    /// `ω = (1 + √−D)/2`, used when `D ≡ 3 mod 4`.
    HalfOnePlusRoot,
    /// `ω = √−D/2`, used when `4 | D`.
    HalfRoot,
}

/// An imaginary quadratic field of fundamental discriminant `−D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadField {
    d: u64,
    e: u32,
    dprime: u64,
    omega: OmegaKind,
    unit_count: u32,
    primes: Vec<u64>,
    classes: Vec<DiffClass>,
}

/// Canonical representative of a class in `[d_K]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassRep {
    /// Odd `D`: `x` encodes `i x / √D`.
    Odd(u64),
    /// Even `D`: `(x1, x2)` encodes `x1/2 + i x2/√D`.
    Even(u64, u64),
}

/// A class `u ∈ [d_K]` with its norm data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiffClass {
    /// Position in the canonical order.
    pub index: usize,
    pub rep: ClassRep,
    /// `D|u|² mod D`.
    pub dnorm: u64,
    /// `a_u = a_D(−D|u|²)`: the number of classes sharing this `dnorm`.
    pub mult: u64,
}

/// A quadratic character `ψ_m = ∏_{p | m} χ_p` attached to a divisor `m` of `D`
/// (or, for `m` not coprime to `D/m`, to its prime support).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Character {
    modulus: u64,
    odd: u64,
    two: TwoKind,
}

/// The 2-primary component of `χ_K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoKind {
    /// No 2-part.
    None,
    /// `(−4 | n)`, for `4 ∥ D`.
    Minus4,
    /// `(−8 | n)`, for `8 | D` with `D/8 ≡ 1 mod 4`.
    Minus8,
    /// `(8 | n)`, for `8 | D` with `D/8 ≡ 3 mod 4`.
    Plus8,
}

/// An element `a + bω` of `O_K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgInt {
    pub a: i64,
    pub b: i64,
}

fn is_squarefree(n: u64) -> bool {
    factorize(n).factors.iter().all(|&(_, e)| e == 1)
}

/// Whether `−D` is a fundamental discriminant.
pub fn is_fundamental(d: u64) -> bool {
    if d < 3 {
        return false;
    }
    match d % 4 {
        3 => is_squarefree(d),
        0 => {
            let m = d / 4;
            (m % 4 == 1 || m % 4 == 2) && is_squarefree(m)
        }
        _ => false,
    }
}

impl QuadField {
    /// Builds the field `Q(√−D)`; `−D` must be a fundamental discriminant.
    pub fn new(d: u64) -> Result<Self> {
        if !is_fundamental(d) {
            return Err(Error::NotFundamental(d));
        }
        let e = val(2, d as i64);
        let dprime = d >> e;
        let omega = if e == 0 { OmegaKind::HalfOnePlusRoot } else { OmegaKind::HalfRoot };
        let unit_count = match d {
            3 => 6,
            4 => 4,
            _ => 2,
        };
        let primes = factorize(d).primes();
        let mut field = QuadField { d, e, dprime, omega, unit_count, primes, classes: Vec::new() };
        field.classes = field.build_classes();
        Ok(field)
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    /// `val_2(D) ∈ {0, 2, 3}`.
    pub fn e(&self) -> u32 {
        self.e
    }

    /// The odd part `D'` of `D = 2^e D'`.
    pub fn dprime(&self) -> u64 {
        self.dprime
    }

    pub fn omega_kind(&self) -> OmegaKind {
        self.omega
    }

    /// `|O_K^×|`.
    pub fn unit_count(&self) -> u32 {
        self.unit_count
    }

    /// Prime divisors of `D`.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// The `D` classes of `[d_K]` in canonical order.
    pub fn classes(&self) -> &[DiffClass] {
        &self.classes
    }

    fn build_classes(&self) -> Vec<DiffClass> {
        let d = self.d;
        let reps: Vec<ClassRep> = if self.e == 0 {
            (0..d).map(ClassRep::Odd).collect()
        } else {
            (0..2).flat_map(|x1| (0..d / 2).map(move |x2| ClassRep::Even(x1, x2))).collect()
        };
        let dnorms: Vec<u64> = reps.iter().map(|r| self.rep_dnorm(*r)).collect();
        reps.iter()
            .enumerate()
            .map(|(index, &rep)| DiffClass {
                index,
                rep,
                dnorm: dnorms[index],
                mult: dnorms.iter().filter(|&&x| x == dnorms[index]).count() as u64,
            })
            .collect()
    }

    fn rep_dnorm(&self, rep: ClassRep) -> u64 {
        let d = self.d as i64;
        match rep {
            ClassRep::Odd(x) => modp((x * x) as i64, d) as u64,
            ClassRep::Even(x1, x2) => {
                let t = (1i64 << (self.e - 2)) * self.dprime as i64 * (x1 * x1) as i64 + (x2 * x2) as i64;
                modp(t, d) as u64
            }
        }
    }

    /// The class with the given canonical representative.
    pub fn class(&self, rep: ClassRep) -> DiffClass {
        self.classes[self.index_of(rep)]
    }

    fn index_of(&self, rep: ClassRep) -> usize {
        match rep {
            ClassRep::Odd(x) => x as usize,
            ClassRep::Even(x1, x2) => (x1 * (self.d / 2) + x2) as usize,
        }
    }

    /// Coordinates `(X, Y)` of `u` in the encoding `(X + Y√−D)/(2D)`.
    pub fn class_coords(&self, u: &DiffClass) -> (i64, i64) {
        let d = self.d as i64;
        match u.rep {
            ClassRep::Odd(x) => (0, 2 * x as i64),
            ClassRep::Even(x1, x2) => (d * x1 as i64, 2 * x2 as i64),
        }
    }

    /// Coordinates of `ω` in the encoding `(X + Y√−D)/(2D)`.
    pub fn omega_coords(&self) -> (i64, i64) {
        let d = self.d as i64;
        match self.omega {
            OmegaKind::HalfOnePlusRoot => (d, d),
            OmegaKind::HalfRoot => (0, d),
        }
    }

    /// The class of an element `(X + Y√−D)/(2D)` of `d_K⁻¹`.
    pub fn class_of_coords(&self, x: i64, y: i64) -> DiffClass {
        let d = self.d as i64;
        let rep = if self.e == 0 {
            debug_assert_eq!((y - x) % 2, 0);
            ClassRep::Odd(modp((y - x) / 2, d) as u64)
        } else {
            debug_assert_eq!(x % d, 0);
            debug_assert_eq!(y % 2, 0);
            ClassRep::Even(modp(x / d, 2) as u64, modp(y / 2, d / 2) as u64)
        };
        self.class(rep)
    }

    /// The class `t·u` for an integer `t`.
    pub fn scale_class(&self, u: &DiffClass, t: i64) -> DiffClass {
        let (x, y) = self.class_coords(u);
        self.class_of_coords(x * t, y * t)
    }

    /// The class `u + v`.
    pub fn add_classes(&self, u: &DiffClass, v: &DiffClass) -> DiffClass {
        let (x1, y1) = self.class_coords(u);
        let (x2, y2) = self.class_coords(v);
        self.class_of_coords(x1 + x2, y1 + y2)
    }

    /// `ψ_m = ∏_{p | m} χ_p` for `m | D` with `gcd(m, D/m) = 1`.
    pub fn chi_component(&self, m: u64) -> Result<Character> {
        if m == 0 || self.d % m != 0 || crate::arith::component(self.d, m) != m {
            return Err(Error::InvalidCharacterModulus { d: self.d, m });
        }
        Ok(self.character_on(m))
    }

    /// `ψ_m` for any positive `m`: the product of `χ_p` over primes `p | gcd(m, D)`.
    pub fn character_on(&self, m: u64) -> Character {
        let mut odd = 1;
        for &p in &self.primes {
            if p != 2 && m % p == 0 {
                odd *= p;
            }
        }
        let two = if m % 2 == 0 && self.e > 0 { self.two_kind() } else { TwoKind::None };
        let modulus = match two {
            TwoKind::None => odd,
            TwoKind::Minus4 => 4 * odd,
            _ => 8 * odd,
        };
        Character { modulus, odd, two }
    }

    fn two_kind(&self) -> TwoKind {
        match self.e {
            2 => TwoKind::Minus4,
            3 if (self.d / 8) % 4 == 1 => TwoKind::Minus8,
            3 => TwoKind::Plus8,
            _ => TwoKind::None,
        }
    }

    /// The full character `χ_K`.
    pub fn chi(&self) -> Character {
        self.character_on(self.d)
    }

    /// `χ_p` for a prime `p | D`.
    pub fn chi_p(&self, p: u64) -> Character {
        self.character_on(p)
    }

    /// `χ_2`, the 2-primary component (trivial for odd `D`).
    pub fn chi_2(&self) -> Character {
        self.character_on(2)
    }

    /// `a_D(ℓ) = ∏_{p | D}(1 + χ_p(−ℓ))`.
    pub fn a_d(&self, ell: i64) -> u64 {
        self.primes.iter().map(|&p| (1 + self.chi_p(p).eval(-ell)) as u64).product()
    }

    /// Whether `p` is inert in `K`, i.e. `χ_K(p) = −1`.
    pub fn is_inert(&self, p: u64) -> bool {
        self.chi().eval(p as i64) == -1
    }

    /// The norm `|a + bω|²`.
    pub fn norm(&self, x: AlgInt) -> i64 {
        match self.omega {
            OmegaKind::HalfOnePlusRoot => x.a * x.a + x.a * x.b + x.b * x.b * ((1 + self.d as i64) / 4),
            OmegaKind::HalfRoot => x.a * x.a + x.b * x.b * (self.d as i64 / 4),
        }
    }

    /// Complex conjugation on `O_K`.
    pub fn conj(&self, x: AlgInt) -> AlgInt {
        match self.omega {
            OmegaKind::HalfOnePlusRoot => AlgInt { a: x.a + x.b, b: -x.b },
            OmegaKind::HalfRoot => AlgInt { a: x.a, b: -x.b },
        }
    }

    /// Product in `O_K`.
    pub fn mul(&self, x: AlgInt, y: AlgInt) -> AlgInt {
        // ω² = tω − n with (t, n) the trace and norm of ω.
        let (t, n) = match self.omega {
            OmegaKind::HalfOnePlusRoot => (1, (1 + self.d as i64) / 4),
            OmegaKind::HalfRoot => (0, self.d as i64 / 4),
        };
        let bb = x.b * y.b;
        AlgInt { a: x.a * y.a - n * bb, b: x.a * y.b + x.b * y.a + t * bb }
    }

    /// Sum in `O_K`.
    pub fn add(&self, x: AlgInt, y: AlgInt) -> AlgInt {
        AlgInt { a: x.a + y.a, b: x.b + y.b }
    }

    /// Numeric value of `a + bω`.
    pub fn embed(&self, x: AlgInt) -> num_complex::Complex64 {
        let s = (self.d as f64).sqrt() / 2.0;
        match self.omega {
            OmegaKind::HalfOnePlusRoot => num_complex::Complex64::new(x.a as f64 + x.b as f64 / 2.0, x.b as f64 * s),
            OmegaKind::HalfRoot => num_complex::Complex64::new(x.a as f64, x.b as f64 * s),
        }
    }
}

impl AlgInt {
    pub const ZERO: AlgInt = AlgInt { a: 0, b: 0 };
    pub const ONE: AlgInt = AlgInt { a: 1, b: 0 };

    pub fn from_int(n: i64) -> Self {
        AlgInt { a: n, b: 0 }
    }

    pub fn neg(self) -> Self {
        AlgInt { a: -self.a, b: -self.b }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }
}

impl Character {
    /// The trivial character.
    pub fn trivial() -> Self {
        Character { modulus: 1, odd: 1, two: TwoKind::None }
    }

    /// The Legendre symbol modulo an odd prime `p`.
    pub fn legendre(p: u64) -> Self {
        assert!(p % 2 == 1 && crate::arith::is_prime(p), "legendre expects an odd prime");
        Character { modulus: p, odd: p, two: TwoKind::None }
    }

    /// Conductor and modulus of the character.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn two_kind(&self) -> TwoKind {
        self.two
    }

    /// `ψ(n) ∈ {−1, 0, 1}`.
    pub fn eval(&self, n: i64) -> i8 {
        let odd_part = if self.odd == 1 { 1 } else { jacobi(n, self.odd) };
        let two_part = match self.two {
            TwoKind::None => 1,
            TwoKind::Minus4 => kronecker(-4, n).unwrap_or(0),
            TwoKind::Minus8 => kronecker(-8, n).unwrap_or(0),
            TwoKind::Plus8 => kronecker(8, n).unwrap_or(0),
        };
        odd_part * two_part
    }

    /// `ψ(−1)`.
    pub fn parity(&self) -> i8 {
        self.eval(-1)
    }

    /// Whether `ε(ψ) = i` (odd character); otherwise `ε(ψ) = 1`.
    pub fn epsilon_is_i(&self) -> bool {
        self.parity() == -1
    }

    /// Product of characters with coprime moduli.
    pub fn times(&self, other: &Character) -> Character {
        assert!(
            self.two == TwoKind::None || other.two == TwoKind::None,
            "characters overlap at 2"
        );
        let two = if self.two == TwoKind::None { other.two } else { self.two };
        Character { modulus: self.modulus * other.modulus, odd: self.odd * other.odd, two }
    }
}
