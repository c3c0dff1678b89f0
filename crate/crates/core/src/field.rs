//! Prime field arithmetic, the additive character `psi`, the quadratic
//! character, and the group SL2 over the field together with its Bruhat
//! decomposition.
//!
//! Field elements are plain `u64` values kept canonical in `0..p`.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted by [`PrimeField::new`]. Products of two reduced
/// elements must fit in a `u64`.
pub const MAX_MODULUS: u64 = 1 << 20;

pub fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero element by Fermat's little theorem.
pub fn mod_inv(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p), "inverse of zero");
    mod_pow(a, p - 2, p)
}

#[inline]
pub fn mod_neg(a: u64, p: u64) -> u64 {
    (p - a % p) % p
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors of `n`, increasing.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The prime field F_p with cached generator, non-square and character tables.
#[derive(Clone, Debug)]
pub struct PrimeField {
    p: u64,
    generator: u64,
    nonsquare: u64,
    half: u64,
    characters: Vec<Complex64>,
    legendre: Vec<i8>,
}

impl PrimeField {
    /// Sets up F_p for an odd prime `p >= 5`.
    pub fn new(p: u64) -> Result<Self> {
        if p == 3 {
            return Err(Error::ModulusTooSmall(p));
        }
        if p.is_multiple_of(2) || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if p > MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }

        let order = p - 1;
        let factors = prime_factors(order);
        let generator = (2..p)
            .find(|&g| factors.iter().all(|&q| mod_pow(g, order / q, p) != 1))
            .expect("a cyclic group of prime-minus-one order has a generator");

        let legendre: Vec<i8> = (0..p)
            .map(|a| match mod_pow(a, (p - 1) / 2, p) {
                0 => 0,
                1 => 1,
                _ => -1,
            })
            .collect();
        let nonsquare = (2..p)
            .find(|&a| legendre[a as usize] == -1)
            .expect("odd prime fields contain non-squares");

        let characters = (0..p)
            .map(|t| {
                let theta = 2.0 * std::f64::consts::PI * (t as f64) / (p as f64);
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();

        Ok(Self {
            p,
            generator,
            nonsquare,
            half: p.div_ceil(2),
            characters,
            legendre,
        })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.p as usize
    }

    /// Smallest element of multiplicative order `p - 1`.
    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Smallest quadratic non-residue.
    pub fn nonsquare(&self) -> u64 {
        self.nonsquare
    }

    /// The field element 1/2.
    pub fn half(&self) -> u64 {
        self.half
    }

    #[inline]
    pub fn reduce(&self, a: i64) -> u64 {
        a.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a % self.p * (b % self.p) % self.p
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        mod_neg(a, self.p)
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        (!a.is_multiple_of(self.p)).then(|| mod_inv(a, self.p))
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        mod_pow(a, e, self.p)
    }

    /// Quadratic character: +1 on nonzero squares, -1 on non-squares, 0 at 0.
    #[inline]
    pub fn legendre(&self, a: u64) -> i8 {
        self.legendre[(a % self.p) as usize]
    }

    /// Additive character `exp(2 pi i t / p)`.
    #[inline]
    pub fn psi(&self, t: u64) -> Complex64 {
        self.characters[(t % self.p) as usize]
    }

    /// Additive character at a signed argument.
    #[inline]
    pub fn psi_signed(&self, t: i64) -> Complex64 {
        self.psi(self.reduce(t))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u64) -> u64 {
        let a = a % self.p;
        assert!(a != 0, "zero has no multiplicative order");
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn identity(&self) -> Sl2 {
        Sl2::identity(self.p)
    }

    /// The Weyl element `[[0, 1], [-1, 0]]`.
    pub fn weyl(&self) -> Sl2 {
        Sl2::weyl(self.p)
    }

    /// `[[1, 0], [u, 1]]`.
    pub fn lower_unipotent(&self, u: u64) -> Sl2 {
        Sl2::lower_unipotent(self.p, u)
    }

    /// `diag(a, a^-1)`.
    pub fn diagonal(&self, a: u64) -> Result<Sl2> {
        let ai = self.inv(a).ok_or(Error::ZeroScaling)?;
        Ok(Sl2::from_raw(self.p, a % self.p, 0, 0, ai))
    }

    /// Every element of SL2(F_p) in lexicographic `(a, b, c, d)` order.
    pub fn sl2_elements(&self) -> impl Iterator<Item = Sl2> + '_ {
        let p = self.p;
        (0..p).flat_map(move |a| {
            (0..p).flat_map(move |b| {
                let pairs: Box<dyn Iterator<Item = (u64, u64)>> = if a == 0 {
                    // -bc = 1 fixes c, d is free
                    let c = if b == 0 { None } else { Some(mod_neg(mod_inv(b, p), p)) };
                    Box::new(c.into_iter().flat_map(move |c| (0..p).map(move |d| (c, d))))
                } else {
                    let ai = mod_inv(a, p);
                    Box::new((0..p).map(move |c| (c, (1 + b * c % p) % p * ai % p)))
                };
                pairs.map(move |(c, d)| Sl2::from_raw(p, a, b, c, d))
            })
        })
    }
}

/// A 2x2 matrix of determinant one over F_p, stored row-major.
///
/// Ordering compares `(p, a, b, c, d)` lexicographically, which is the
/// serialization order used to pick canonical representatives.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sl2 {
    p: u64,
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

impl Sl2 {
    pub fn new(p: u64, a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        let (a, b, c, d) = (a % p, b % p, c % p, d % p);
        if (a * d + p * p - b * c) % p != 1 {
            return Err(Error::NotSpecialLinear { p, a, b, c, d });
        }
        Ok(Self { p, a, b, c, d })
    }

    #[inline]
    pub(crate) fn from_raw(p: u64, a: u64, b: u64, c: u64, d: u64) -> Self {
        debug_assert_eq!((a * d + p * p - b * c) % p, 1);
        Self { p, a, b, c, d }
    }

    pub fn identity(p: u64) -> Self {
        Self::from_raw(p, 1, 0, 0, 1)
    }

    pub fn weyl(p: u64) -> Self {
        Self::from_raw(p, 0, 1, p - 1, 0)
    }

    pub fn lower_unipotent(p: u64, u: u64) -> Self {
        Self::from_raw(p, 1, 0, u % p, 1)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_identity(&self) -> bool {
        self.entries() == [1, 0, 0, 1]
    }

    pub fn trace(&self) -> u64 {
        (self.a + self.d) % self.p
    }

    pub fn inverse(&self) -> Self {
        let p = self.p;
        Self::from_raw(p, self.d, mod_neg(self.b, p), mod_neg(self.c, p), self.a)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::identity(self.p);
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Conjugate `self * x * self^-1`.
    pub fn conjugate(&self, x: &Sl2) -> Sl2 {
        *self * *x * self.inverse()
    }

    /// Action on a column vector `(tau, w)` of the time-frequency plane.
    pub fn act(&self, v: (u64, u64)) -> (u64, u64) {
        let p = self.p;
        let (t, w) = (v.0 % p, v.1 % p);
        ((self.a * t + self.b * w) % p, (self.c * t + self.d * w) % p)
    }

    /// Multiplicative order, by repeated multiplication.
    pub fn order(&self) -> u64 {
        let mut x = *self;
        let mut k = 1;
        while !x.is_identity() {
            x = x * *self;
            k += 1;
        }
        k
    }

    /// Decomposes `self` along `SL2 = UA ∪ UAwU`, with `U` the lower unipotent
    /// group and `A` the diagonal torus.
    pub fn bruhat(&self) -> BruhatForm {
        let p = self.p;
        if self.b == 0 {
            // [[a, 0], [c, a^-1]] = L(c / a) diag(a, a^-1)
            let u = self.c * mod_inv(self.a, p) % p;
            BruhatForm::TorusUnipotent { u, a: self.a }
        } else {
            // L(u2) diag(t, t^-1) w L(u1) = [[t u1, t], [t u1 u2 - t^-1, t u2]]
            let bi = mod_inv(self.b, p);
            BruhatForm::BigCell {
                u2: self.d * bi % p,
                a: self.b,
                u1: self.a * bi % p,
            }
        }
    }
}

impl Mul for Sl2 {
    type Output = Sl2;

    fn mul(self, rhs: Sl2) -> Sl2 {
        assert_eq!(self.p, rhs.p, "SL2 elements over different fields");
        let p = self.p;
        Sl2::from_raw(
            p,
            (self.a * rhs.a + self.b * rhs.c) % p,
            (self.a * rhs.b + self.b * rhs.d) % p,
            (self.c * rhs.a + self.d * rhs.c) % p,
            (self.c * rhs.b + self.d * rhs.d) % p,
        )
    }
}

impl fmt::Debug for Sl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]] mod {}", self.a, self.b, self.c, self.d, self.p)
    }
}

impl fmt::Display for Sl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Factorization of an SL2 element into lower unipotent, diagonal and Weyl
/// factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruhatForm {
    /// `g = L(u) · diag(a, a^-1)`
    TorusUnipotent { u: u64, a: u64 },
    /// `g = L(u2) · diag(a, a^-1) · w · L(u1)`
    BigCell { u2: u64, a: u64, u1: u64 },
}

impl BruhatForm {
    /// Multiplies the factors back together.
    pub fn recompose(&self, p: u64) -> Sl2 {
        let diag = |a: u64| Sl2::from_raw(p, a, 0, 0, mod_inv(a, p));
        match *self {
            BruhatForm::TorusUnipotent { u, a } => Sl2::lower_unipotent(p, u) * diag(a),
            BruhatForm::BigCell { u2, a, u1 } => {
                Sl2::lower_unipotent(p, u2) * diag(a) * Sl2::weyl(p) * Sl2::lower_unipotent(p, u1)
            }
        }
    }

    pub fn torus_parameter(&self) -> u64 {
        match *self {
            BruhatForm::TorusUnipotent { a, .. } | BruhatForm::BigCell { a, .. } => a,
        }
    }
}
