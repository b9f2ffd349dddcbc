//! Shortened primitive binary BCH component codes.
//!
//! Codewords are laid out as `[information | parity]`. Vector position `j`
//! carries the coefficient of `x^(n-1-j)`, so the `s` shortened positions are
//! the (absent) leading information positions. Column codes built from the
//! reciprocal generator are decoded by reversing the word and running the
//! row-code decoder, since the mirror image of a column codeword is a row
//! codeword.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{GaloisField, Gf, Poly2};
use crate::gf2::BitMatrix;

/// Generator of a narrow-sense binary BCH code: the LCM of the minimal
/// polynomials of `α, α^2, ..., α^(2t)`.
pub fn bch_generator(field: &GaloisField, t: usize) -> Result<Poly2> {
    if t == 0 {
        return Err(Error::params("BCH radius t must be at least 1"));
    }
    if 2 * t >= field.order() {
        return Err(Error::params(format!("t={t} too large for GF(2^{})", field.m())));
    }
    let mut covered = vec![false; field.order()];
    let mut g = Poly2::one();
    for i in 1..=2 * t {
        if covered[i] {
            continue;
        }
        let e = field.alpha_pow(i);
        for c in field.conjugacy_class(e) {
            covered[field.log(c)] = true;
        }
        g = g.mul(&field.minimal_polynomial(e));
    }
    let deg = g.degree().unwrap();
    let expected = field.m() as usize * t;
    if deg != expected {
        return Err(Error::params(format!(
            "generator degree {deg} != m*t = {expected} for m={}, t={t}",
            field.m()
        )));
    }
    Ok(g)
}

/// `x^deg(g) g(1/x)`.
pub fn reciprocal_generator(g: &Poly2) -> Poly2 {
    debug_assert_eq!(g.coeff(0), 1, "reciprocal of a generator with g(0) = 0");
    g.reciprocal()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeRole {
    Row,
    Column,
}

/// How a column code's generator relates to the row code's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnGenerator {
    /// Same generator as the row code.
    Same,
    /// Reciprocal of the row generator.
    Reciprocal,
}

/// Parity sub-matrices of a systematic generator: `G_p = [G_i; G_r]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityPartition {
    pub gp: BitMatrix,
    pub gi: BitMatrix,
    pub gr: BitMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    /// Positions flipped to reach a codeword (possibly a miscorrection).
    Corrected { flips: Vec<usize> },
    Failure,
}

impl DecodeOutcome {
    pub fn is_failure(&self) -> bool {
        matches!(self, DecodeOutcome::Failure)
    }
}

/// JSON descriptor used to validate cached constructions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub m: u32,
    pub t: usize,
    pub s: usize,
    pub role: CodeRole,
    pub primitive_poly: String,
    pub generator: String,
}

#[derive(Debug, Clone)]
pub struct ComponentCode {
    field: Arc<GaloisField>,
    t: usize,
    s: usize,
    n: usize,
    k: usize,
    gen: Poly2,
    role: CodeRole,
    mirrored: bool,
    gp: BitMatrix,
}

impl ComponentCode {
    /// Row code: shortened BCH code of length `2^m - 1 - s`.
    pub fn row(field: Arc<GaloisField>, t: usize, s: usize) -> Result<Self> {
        let g = bch_generator(&field, t)?;
        Self::build(field, t, s, g, CodeRole::Row, false)
    }

    /// Column code paired with a row code of the same parameters.
    pub fn column(field: Arc<GaloisField>, t: usize, s: usize, kind: ColumnGenerator) -> Result<Self> {
        let g = bch_generator(&field, t)?;
        match kind {
            ColumnGenerator::Same => Self::build(field, t, s, g, CodeRole::Column, false),
            ColumnGenerator::Reciprocal => {
                let f = reciprocal_generator(&g);
                Self::build(field, t, s, f, CodeRole::Column, true)
            }
        }
    }

    fn build(field: Arc<GaloisField>, t: usize, s: usize, gen: Poly2, role: CodeRole, mirrored: bool) -> Result<Self> {
        let full = field.order();
        let r = gen.degree().unwrap();
        if s >= full || full - s <= r {
            return Err(Error::params(format!(
                "shortening s={s} leaves no information bits (2^m-1={full}, r={r})"
            )));
        }
        let n = full - s;
        let k = n - r;
        let mut code = ComponentCode {
            field,
            t,
            s,
            n,
            k,
            gen,
            role,
            mirrored,
            gp: BitMatrix::zeros(0, 0),
        };
        let mut gp = BitMatrix::zeros(k, r);
        for i in 0..k {
            // message bit i is the coefficient of x^(n-1-i) once shifted
            let rem = Poly2::monomial(n - 1 - i).rem(&code.gen);
            for j in 0..r {
                if rem.coeff(r - 1 - j) == 1 {
                    gp.set(i, j, true);
                }
            }
        }
        code.gp = gp;
        Ok(code)
    }

    pub fn field(&self) -> &Arc<GaloisField> {
        &self.field
    }
    pub fn m(&self) -> u32 {
        self.field.m()
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn r(&self) -> usize {
        self.n - self.k
    }
    pub fn generator(&self) -> &Poly2 {
        &self.gen
    }
    pub fn role(&self) -> CodeRole {
        self.role
    }
    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    /// `G_p`: row `i` is the parity of the unit message `e_i`.
    pub fn parity_matrix(&self) -> &BitMatrix {
        &self.gp
    }

    pub fn parity_partition(&self) -> Result<ParityPartition> {
        let (k, r) = (self.k, self.r());
        if k <= r {
            return Err(Error::params(format!("parity partition needs k > r (k={k}, r={r})")));
        }
        Ok(ParityPartition {
            gp: self.gp.clone(),
            gi: self.gp.submatrix(0..k - r, 0..r),
            gr: self.gp.submatrix(k - r..k, 0..r),
        })
    }

    /// Word polynomial: position `j` is the coefficient of `x^(n-1-j)`.
    pub fn word_poly(&self, word: &[u8]) -> Poly2 {
        let mut coeffs = word.to_vec();
        coeffs.reverse();
        Poly2::from_coeffs(&coeffs)
    }

    /// Systematic encoding by polynomial long division.
    pub fn systematic_encode(&self, msg: &[u8]) -> Vec<u8> {
        assert_eq!(msg.len(), self.k, "message length must equal k");
        let r = self.r();
        let mut shifted = vec![0u8; r];
        shifted.extend(msg.iter().rev());
        let rem = Poly2::from_coeffs(&shifted).rem(&self.gen);
        let mut word = msg.to_vec();
        word.extend((0..r).map(|i| rem.coeff(r - 1 - i)));
        word
    }

    /// Zero remainder modulo the generator.
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        assert_eq!(word.len(), self.n, "word length must equal n");
        self.word_poly(word).rem(&self.gen).is_zero()
    }

    pub fn descriptor(&self) -> CodeDescriptor {
        CodeDescriptor {
            m: self.m(),
            t: self.t,
            s: self.s,
            role: self.role,
            primitive_poly: format!("{:x}", self.field.primitive_poly()),
            generator: self.gen.to_hex(),
        }
    }

    /// Bounded-distance decoding.
    pub fn decode(&self, word: &[u8]) -> DecodeOutcome {
        self.decode_shortened(word, 0)
    }

    /// Bounded-distance decoding with the first `frozen_prefix` positions
    /// known to be zero; a correction touching them is reported as failure.
    pub fn decode_shortened(&self, word: &[u8], frozen_prefix: usize) -> DecodeOutcome {
        assert_eq!(word.len(), self.n, "word length must equal n");
        let flips = if self.mirrored {
            let rev: Vec<u8> = word.iter().rev().copied().collect();
            self.core_decode(&rev)
                .map(|f| f.into_iter().map(|j| self.n - 1 - j).collect::<Vec<_>>())
        } else {
            self.core_decode(word)
        };
        match flips {
            Some(f) if f.iter().all(|&j| j >= frozen_prefix) => DecodeOutcome::Corrected { flips: f },
            _ => DecodeOutcome::Failure,
        }
    }

    /// Decodes and returns the corrected word alongside the outcome.
    pub fn decode_word(&self, word: &[u8]) -> (Vec<u8>, DecodeOutcome) {
        let outcome = self.decode(word);
        let mut out = word.to_vec();
        if let DecodeOutcome::Corrected { flips } = &outcome {
            for &j in flips {
                out[j] ^= 1;
            }
        }
        (out, outcome)
    }

    /// Syndromes, Berlekamp–Massey and Chien search against roots
    /// `α^1..α^2t`. Returns the positions to flip.
    fn core_decode(&self, word: &[u8]) -> Option<Vec<usize>> {
        let f = &*self.field;
        let order = f.order();
        let n = self.n;
        let t2 = 2 * self.t;
        let mut syn = vec![0 as Gf; t2 + 1];
        let mut any = false;
        for i in (1..=t2).step_by(2) {
            let mut acc = 0;
            for (j, &b) in word.iter().enumerate() {
                if b != 0 {
                    acc ^= f.alpha_pow(i * (n - 1 - j) % order);
                }
            }
            syn[i] = acc;
            any |= acc != 0;
        }
        if !any {
            return Some(Vec::new());
        }
        for i in (2..=t2).step_by(2) {
            syn[i] = f.mul(syn[i / 2], syn[i / 2]);
        }

        // Berlekamp–Massey
        let mut lambda: Vec<Gf> = vec![1];
        let mut prev: Vec<Gf> = vec![1];
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut prev_disc: Gf = 1;
        for step in 0..t2 {
            let mut disc = syn[step + 1];
            for i in 1..=len.min(lambda.len() - 1) {
                disc ^= f.mul(lambda[i], syn[step + 1 - i]);
            }
            if disc == 0 {
                shift += 1;
                continue;
            }
            let coef = f.div(disc, prev_disc);
            let mut next = lambda.clone();
            if next.len() < prev.len() + shift {
                next.resize(prev.len() + shift, 0);
            }
            for (i, &p) in prev.iter().enumerate() {
                next[i + shift] ^= f.mul(coef, p);
            }
            if 2 * len <= step {
                prev = lambda;
                len = step + 1 - len;
                prev_disc = disc;
                shift = 1;
            } else {
                shift += 1;
            }
            lambda = next;
        }
        while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
            lambda.pop();
        }
        let deg = lambda.len() - 1;
        if deg != len || deg > self.t {
            return None;
        }

        // Chien search over the n present positions: root α^{-e} ↔ degree e
        let mut terms = lambda.clone();
        let steps: Vec<Gf> = (0..=deg).map(|i| f.alpha_pow((order - i % order) % order)).collect();
        let mut flips = Vec::with_capacity(deg);
        for e in 0..n {
            if e > 0 {
                for i in 1..=deg {
                    terms[i] = f.mul(terms[i], steps[i]);
                }
            }
            let v = terms.iter().fold(0, |a, &b| a ^ b);
            if v == 0 {
                flips.push(n - 1 - e);
                if flips.len() == deg {
                    break;
                }
            }
        }
        if flips.len() != deg {
            return None;
        }
        flips.sort_unstable();
        Some(flips)
    }
}
