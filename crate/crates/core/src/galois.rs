//! GF(2^m) arithmetic with log/antilog tables, and binary polynomials.

use std::fmt;

use crate::error::{Error, Result};

/// Default primitive polynomials, indexed by `m` (bit `i` is the coefficient
/// of `x^i`). These are the conventional minimum-weight choices from the
/// standard BCH tables.
const DEFAULT_PRIMITIVE: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// Field element in the polynomial basis.
pub type Gf = u32;

/// GF(2^m) built from a primitive polynomial; `α` is the class of `x`.
#[derive(Clone)]
pub struct GaloisField {
    m: u32,
    poly: u32,
    exp: Vec<Gf>,
    log: Vec<u32>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.m, self.poly)
    }
}

impl GaloisField {
    pub fn new(m: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::params(format!("extension degree m={m} outside 2..=16")));
        }
        Self::with_polynomial(m, DEFAULT_PRIMITIVE[m as usize])
    }

    /// Builds the field from an explicit polynomial, rejecting it unless `x`
    /// has multiplicative order `2^m - 1`.
    pub fn with_polynomial(m: u32, poly: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::params(format!("extension degree m={m} outside 2..=16")));
        }
        if poly >> m != 1 {
            return Err(Error::NotPrimitive { m, poly: poly as u64 });
        }
        let order = (1usize << m) - 1;
        let mut exp = vec![0; 2 * order];
        let mut log = vec![0u32; order + 1];
        let mut x: Gf = 1;
        for i in 0..order {
            if i > 0 && x == 1 {
                return Err(Error::NotPrimitive { m, poly: poly as u64 });
            }
            exp[i] = x;
            log[x as usize] = i as u32;
            x <<= 1;
            if x >> m != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::NotPrimitive { m, poly: poly as u64 });
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(GaloisField { m, poly, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Multiplicative group order `2^m - 1`.
    pub fn order(&self) -> usize {
        (1usize << self.m) - 1
    }

    /// `α^i` for any exponent.
    #[inline]
    pub fn alpha_pow(&self, i: usize) -> Gf {
        self.exp[i % self.order()]
    }

    /// Discrete log; `e` must be nonzero.
    #[inline]
    pub fn log(&self, e: Gf) -> usize {
        debug_assert!(e != 0);
        self.log[e as usize] as usize
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn inv(&self, a: Gf) -> Gf {
        assert!(a != 0, "inverse of zero");
        let n = self.order();
        self.exp[(n - self.log[a as usize] as usize) % n]
    }

    #[inline]
    pub fn div(&self, a: Gf, b: Gf) -> Gf {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Gf, e: usize) -> Gf {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        self.exp[(self.log[a as usize] as usize * (e % self.order())) % self.order()]
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: Gf) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Conjugacy class `{e, e^2, e^4, ...}`.
    pub fn conjugacy_class(&self, e: Gf) -> Vec<Gf> {
        let mut class = vec![e];
        let mut x = self.mul(e, e);
        while x != e {
            class.push(x);
            x = self.mul(x, x);
        }
        class
    }

    /// Minimal polynomial over GF(2) of a nonzero element: the product of
    /// `(x - c)` over its conjugacy class.
    pub fn minimal_polynomial(&self, e: Gf) -> Poly2 {
        assert!(e != 0, "minimal polynomial of zero");
        // coefficients in GF(2^m), ascending
        let mut coeffs: Vec<Gf> = vec![1];
        for c in self.conjugacy_class(e) {
            let mut next = vec![0; coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] ^= a;
                next[i] ^= self.mul(a, c);
            }
            coeffs = next;
        }
        let bits: Vec<u8> = coeffs
            .iter()
            .map(|&c| {
                assert!(c <= 1, "minimal polynomial coefficient outside GF(2)");
                c as u8
            })
            .collect();
        Poly2::from_coeffs(&bits)
    }

    /// Evaluates a binary polynomial at a field element (Horner).
    pub fn eval(&self, p: &Poly2, x: Gf) -> Gf {
        let mut acc = 0;
        for i in (0..=p.degree().unwrap_or(0)).rev() {
            acc = self.mul(acc, x) ^ p.coeff(i) as Gf;
        }
        acc
    }
}

/// Polynomial over GF(2), coefficients packed ascending by degree.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly2 {
    words: Vec<u64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    pub fn monomial(deg: usize) -> Self {
        let mut p = Poly2 { words: vec![0; deg / 64 + 1] };
        p.words[deg / 64] = 1 << (deg % 64);
        p
    }

    /// From 0/1 coefficients in ascending degree order.
    pub fn from_coeffs(coeffs: &[u8]) -> Self {
        let mut words = vec![0u64; coeffs.len().div_ceil(64)];
        for (i, &c) in coeffs.iter().enumerate() {
            if c & 1 == 1 {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        let mut p = Poly2 { words };
        p.normalize();
        p
    }

    /// From a bit mask (bit `i` = coefficient of `x^i`).
    pub fn from_mask(mask: u64) -> Self {
        let mut p = Poly2 { words: vec![mask] };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    #[inline]
    pub fn coeff(&self, i: usize) -> u8 {
        self.words.get(i / 64).map_or(0, |w| ((w >> (i % 64)) & 1) as u8)
    }

    /// Coefficients `0..=degree`, ascending.
    pub fn coeffs(&self) -> Vec<u8> {
        match self.degree() {
            Some(d) => (0..=d).map(|i| self.coeff(i)).collect(),
            None => Vec::new(),
        }
    }

    pub fn add(&self, rhs: &Poly2) -> Poly2 {
        let n = self.words.len().max(rhs.words.len());
        let mut words = vec![0; n];
        for (i, w) in words.iter_mut().enumerate() {
            *w = self.words.get(i).copied().unwrap_or(0) ^ rhs.words.get(i).copied().unwrap_or(0);
        }
        let mut p = Poly2 { words };
        p.normalize();
        p
    }

    /// Carry-less product.
    pub fn mul(&self, rhs: &Poly2) -> Poly2 {
        let (Some(da), Some(db)) = (self.degree(), rhs.degree()) else {
            return Poly2::zero();
        };
        let mut out = vec![0u64; (da + db) / 64 + 1];
        for i in 0..=da {
            if self.coeff(i) == 1 {
                for j in 0..=db {
                    if rhs.coeff(j) == 1 {
                        out[(i + j) / 64] ^= 1 << ((i + j) % 64);
                    }
                }
            }
        }
        let mut p = Poly2 { words: out };
        p.normalize();
        p
    }

    /// Schoolbook long division, returning `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Poly2) -> (Poly2, Poly2) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let mut rem = self.clone();
        let Some(dn) = rem.degree() else {
            return (Poly2::zero(), Poly2::zero());
        };
        if dn < dd {
            return (Poly2::zero(), rem);
        }
        let mut quot = vec![0u64; (dn - dd) / 64 + 1];
        for shift in (0..=dn - dd).rev() {
            if rem.coeff(shift + dd) == 1 {
                quot[shift / 64] |= 1 << (shift % 64);
                for j in 0..=dd {
                    if divisor.coeff(j) == 1 {
                        rem.words[(shift + j) / 64] ^= 1 << ((shift + j) % 64);
                    }
                }
            }
        }
        rem.normalize();
        let mut q = Poly2 { words: quot };
        q.normalize();
        (q, rem)
    }

    pub fn rem(&self, divisor: &Poly2) -> Poly2 {
        self.div_rem(divisor).1
    }

    pub fn gcd(&self, rhs: &Poly2) -> Poly2 {
        let (mut a, mut b) = (self.clone(), rhs.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// `x^deg(p) * p(1/x)`: coefficient reversal.
    pub fn reciprocal(&self) -> Poly2 {
        let mut c = self.coeffs();
        c.reverse();
        Poly2::from_coeffs(&c)
    }

    /// Coefficient bits as a big-endian hex string (bit `i` = `x^i`).
    pub fn to_hex(&self) -> String {
        let Some(d) = self.degree() else {
            return "0".into();
        };
        let nibbles = d / 4 + 1;
        (0..nibbles)
            .rev()
            .map(|k| {
                let v = (0..4).fold(0u8, |acc, b| acc | (self.coeff(4 * k + b) << b));
                char::from_digit(v as u32, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(s: &str) -> Result<Poly2> {
        let mut coeffs = Vec::new();
        for ch in s.trim().chars().rev() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::Format(format!("bad hex digit {ch:?} in polynomial")))?;
            for b in 0..4 {
                coeffs.push(((v >> b) & 1) as u8);
            }
        }
        Ok(Poly2::from_coeffs(&coeffs))
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else {
            return f.write_str("0");
        };
        let terms: Vec<String> = (0..=d)
            .rev()
            .filter(|&i| self.coeff(i) == 1)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        f.write_str(&terms.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn defining_relation_gf16() {
        let f = GaloisField::new(4).unwrap();
        let a = f.alpha_pow(1);
        let a3 = f.alpha_pow(3);
        // α^4 = α + 1 under x^4 + x + 1
        assert_eq!(f.mul(a3, a), 0b0011);
        assert_eq!(f.element_order(a), 15);
    }

    #[test]
    fn order_of_alpha_by_repeated_multiplication() {
        for m in 2..=12 {
            let f = GaloisField::new(m).unwrap();
            let a = f.alpha_pow(1);
            let mut x = a;
            let mut k = 1;
            while x != 1 {
                x = f.mul(x, a);
                k += 1;
            }
            assert_eq!(k, (1 << m) - 1, "m={m}");
        }
    }

    #[test]
    fn all_default_polynomials_primitive() {
        for m in 2..=16 {
            GaloisField::new(m).unwrap();
        }
    }

    #[test]
    fn rejects_non_primitive() {
        // x^4 + x^3 + x^2 + x + 1 is irreducible but α has order 5
        assert!(matches!(GaloisField::with_polynomial(4, 0x1F), Err(Error::NotPrimitive { .. })));
        // reducible
        assert!(GaloisField::with_polynomial(4, 0x15).is_err());
        assert!(GaloisField::new(1).is_err());
        assert!(GaloisField::new(17).is_err());
    }

    #[test]
    fn field_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [4, 7, 8, 9, 10] {
            let f = GaloisField::new(m).unwrap();
            let top = 1u32 << m;
            for _ in 0..100 {
                let x = rng.gen_range(1..top);
                assert_eq!(f.mul(x, f.inv(x)), 1);
                let (a, b, c) = (rng.gen_range(0..top), rng.gen_range(0..top), rng.gen_range(0..top));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
            }
        }
    }

    #[test]
    fn minimal_polynomial_examples() {
        let f = GaloisField::new(4).unwrap();
        assert_eq!(f.minimal_polynomial(f.alpha_pow(1)), Poly2::from_mask(0b10011));
        assert_eq!(f.minimal_polynomial(f.alpha_pow(3)), Poly2::from_mask(0b11111));
        assert_eq!(f.minimal_polynomial(f.alpha_pow(5)), Poly2::from_mask(0b111));
    }

    #[test]
    fn minimal_polynomial_alpha3_by_brute_force_expansion() {
        // expand (x - α^3)(x - α^6)(x - α^12)(x - α^24) by hand-rolled loop
        let f = GaloisField::new(4).unwrap();
        let roots: Vec<Gf> = [3usize, 6, 12, 24].iter().map(|&e| f.alpha_pow(e)).collect();
        let mut c: Vec<Gf> = vec![1];
        for r in roots {
            let mut n = vec![0; c.len() + 1];
            for i in 0..c.len() {
                n[i + 1] ^= c[i];
                n[i] ^= f.mul(c[i], r);
            }
            c = n;
        }
        assert_eq!(c, vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn minimal_polynomial_properties() {
        for m in [4, 6, 8] {
            let f = GaloisField::new(m).unwrap();
            let n = f.order();
            let xn1 = Poly2::monomial(n).add(&Poly2::one());
            let mut seen = vec![false; n + 1];
            let mut total = 0;
            for e in 1..=n as Gf {
                let p = f.minimal_polynomial(e);
                assert_eq!(f.eval(&p, e), 0);
                assert!(xn1.rem(&p).is_zero());
                assert_eq!(p.coeff(p.degree().unwrap()), 1);
                if !seen[e as usize] {
                    for c in f.conjugacy_class(e) {
                        assert!(!seen[c as usize]);
                        seen[c as usize] = true;
                        total += 1;
                    }
                }
            }
            assert_eq!(total, n);
        }
    }

    #[test]
    fn poly_arithmetic() {
        let a = Poly2::from_mask(0b10011);
        let b = Poly2::from_mask(0b11111);
        let prod = a.mul(&b);
        assert_eq!(prod, Poly2::from_mask(0b111010001));
        let (q, r) = prod.div_rem(&a);
        assert_eq!(q, b);
        assert!(r.is_zero());
        assert_eq!(Poly2::from_mask(0b111010001).reciprocal(), Poly2::from_mask(0b100010111));
        assert_eq!(b.reciprocal(), b);
        assert_eq!(Poly2::from_hex(&prod.to_hex()).unwrap(), prod);
        assert_eq!(prod.to_hex(), "1d1");
        assert_eq!(format!("{a:?}"), "x^4+x+1");
        let big = Poly2::monomial(200).add(&Poly2::monomial(3));
        let (q, r) = big.div_rem(&a);
        assert_eq!(q.mul(&a).add(&r), big);
        assert!(r.degree().unwrap() < 4);
    }
}
