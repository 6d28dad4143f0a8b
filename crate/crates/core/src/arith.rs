//! Integer utilities: factorization, valuations, Kronecker symbols, the Chinese
//! remainder theorem, Bézout coefficients and divisor enumeration.

use crate::error::{Error, Result};
use num_integer::Integer;

/// Prime factorization of a positive integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: u64,
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// The distinct prime divisors.
    pub fn primes(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, _)| p).collect()
    }
}

/// Factorizes `n ≥ 1` by trial division.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize expects a positive integer");
    let mut factors = Vec::new();
    let mut rest = n;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Factorization { value: n, factors }
}

/// Whether `n` is prime.
pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).factors == [(n, 1)]
}

/// All primes `p ≤ bound`, by a sieve.
pub fn primes_upto(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

/// The `p`-adic valuation of `n ≠ 0`; `u32::MAX` for `n = 0`.
pub fn val(p: u64, n: i64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut n = n.unsigned_abs();
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Positive divisors of `n ≥ 1` in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n).factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// `∏_{p | mu} p^{val_p(D)}`: the part of `D` supported on the primes of `mu`.
pub fn component(d: u64, mu: u64) -> u64 {
    factorize(d)
        .factors
        .iter()
        .filter(|&&(p, _)| mu % p == 0)
        .map(|&(p, e)| p.pow(e))
        .product()
}

/// Least non-negative residue of `a` modulo `m > 0`.
pub fn modp(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}

/// `(g, x, y)` with `g = gcd(a, b) ≥ 0` and `a x + b y = g`.
pub fn bezout(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Inverse of `a` modulo `m > 0`, if it exists; the result lies in `[0, m)`.
/// Modulo 1 every integer is invertible with inverse 0.
pub fn mod_inv(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = bezout(modp(a, m), m);
    (g == 1).then(|| modp(x, m))
}

/// Solves `x ≡ value_i (mod modulus_i)` and returns the least non-negative
/// solution modulo the lcm of the moduli. Non-coprime moduli are accepted
/// when the residues are consistent.
pub fn crt(residues: &[(i64, i64)]) -> Result<i64> {
    let mut x: i128 = 0;
    let mut m: i128 = 1;
    for &(r, n) in residues {
        if n <= 0 {
            return Err(Error::InconsistentCongruences(format!("non-positive modulus {n}")));
        }
        let n = n as i128;
        let r = (r as i128).rem_euclid(n);
        let g = m.gcd(&n);
        if (r - x).rem_euclid(g) != 0 {
            return Err(Error::InconsistentCongruences(format!(
                "{x} mod {m} is incompatible with {r} mod {n}"
            )));
        }
        // x + m t ≡ r (mod n)  <=>  (m/g) t ≡ (r - x)/g (mod n/g)
        let ng = n / g;
        let t = if ng == 1 {
            0
        } else {
            let inv = mod_inv(((m / g) % ng) as i64, ng as i64).expect("coprime after division by gcd") as i128;
            (((r - x) / g).rem_euclid(ng) * inv).rem_euclid(ng)
        };
        x += m * t;
        m = m / g * n;
        x = x.rem_euclid(m);
    }
    i64::try_from(x).map_err(|_| Error::InconsistentCongruences("solution exceeds i64".into()))
}

/// The Jacobi symbol `(a | n)` for odd `n > 0`.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1, "jacobi expects an odd modulus");
    let mut a = (a as i128).rem_euclid(n as i128) as u64;
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// The Kronecker symbol `(a | n)` with the usual conventions at `n = 0`, `n = -1`
/// and `n = 2`.
pub fn kronecker(a: i64, n: i64) -> Result<i8> {
    if a == 0 && n == 0 {
        return Err(Error::KroneckerUndefined);
    }
    if n == 0 {
        return Ok(if a.abs() == 1 { 1 } else { 0 });
    }
    let mut sign = 1i8;
    if n < 0 && a < 0 {
        sign = -1;
    }
    let mut m = n.unsigned_abs();
    while m % 2 == 0 {
        m /= 2;
        match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => return Ok(0),
            3 | 5 => sign = -sign,
            _ => {}
        }
    }
    Ok(sign * jacobi(a, m))
}

/// Sign of an integer as `-1`, `0` or `1`.
pub fn sign(x: i64) -> i64 {
    x.signum()
}
