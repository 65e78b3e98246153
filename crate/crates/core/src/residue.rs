//! Exact modular arithmetic primitives shared by all other modules.
//!
//! Residues are kept in the canonical range `[0, q)`. The classical
//! convention of writing `r = q` for the zero class is normalized to 0
//! at every boundary of this crate.

use crate::error::{Error, Result};

/// A positive modulus together with its factorization into prime powers.
///
/// All moduli in scope are below 10^6, so trial division is enough.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    q: u64,
    factorization: Vec<(u64, u32)>,
}

impl Modulus {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "modulus must be positive");
        Modulus {
            q,
            factorization: factorize(q),
        }
    }

    pub fn value(&self) -> u64 {
        self.q
    }

    /// Prime-power factorization with strictly increasing primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factorization
    }

    pub fn is_prime(&self) -> bool {
        self.factorization.len() == 1 && self.factorization[0].1 == 1
    }

    /// Euler totient of the modulus.
    pub fn totient(&self) -> u64 {
        self.factorization
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product::<u64>()
            .max(1)
    }
}

/// A reduced residue class: `gcd(residue, q) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitClass {
    residue: u64,
    modulus: Modulus,
}

impl UnitClass {
    pub fn new(residue: i64, modulus: Modulus) -> Result<Self> {
        let r = residue.rem_euclid(modulus.value() as i64) as u64;
        if gcd(r, modulus.value()) != 1 {
            return Err(Error::NotInvertible(residue, modulus.value()));
        }
        Ok(UnitClass {
            residue: if modulus.value() == 1 { 0 } else { r },
            modulus,
        })
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }
}

/// Trial-division factorization, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// base^exp mod q by square-and-multiply, 128-bit intermediates.
pub fn mod_pow(base: i64, exp: u64, q: u64) -> u64 {
    debug_assert!(q >= 1);
    if q == 1 {
        return 0;
    }
    let mut b = base.rem_euclid(q as i64) as u128;
    let mut e = exp;
    let m = q as u128;
    let mut acc: u128 = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `q` via the extended Euclidean algorithm.
pub fn mod_inverse(a: i64, q: u64) -> Result<u64> {
    let a_red = a.rem_euclid(q as i64);
    if q == 1 {
        return Err(Error::NotInvertible(a, q));
    }
    let (mut old_r, mut r) = (a_red as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible(a, q));
    }
    Ok(old_s.rem_euclid(q as i128) as u64)
}

/// The set {x^2 mod p : 1 <= x <= p-1}, of cardinality (p-1)/2 for odd prime p.
pub fn quadratic_residues(p: u64) -> Vec<u64> {
    let mut seen = vec![false; p as usize];
    for x in 1..p {
        seen[(x * x % p) as usize] = true;
    }
    (0..p).filter(|&r| seen[r as usize]).collect()
}

/// Smallest c >= 2 that is not a quadratic residue mod p.
pub fn least_nonresidue(p: u64) -> u64 {
    debug_assert!(p >= 3);
    let qr = quadratic_residues(p);
    (2..p)
        .find(|c| !qr.contains(c))
        .expect("every odd prime >= 3 has a nonresidue")
}

/// Smallest square root of `a` modulo prime `p`, if one exists.
///
/// Brute scan; all primes in scope are tiny.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    (0..p).find(|&x| x * x % p == a)
}
