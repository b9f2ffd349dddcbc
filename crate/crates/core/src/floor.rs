//! Error-floor estimates, minimal stall patterns and the NCG gap.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codec::FrameCodec;
use crate::engine::{Addr, Frame};
use crate::error::{Error, Result};
use crate::ff::FfCode;
use crate::params::Family;
use crate::pff::PffCode;
use crate::staircase::StaircaseCode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloorEstimate {
    pub family: Family,
    pub p: f64,
    pub bker: f64,
    pub ber: f64,
    pub t_i: usize,
    pub t_r: usize,
}

/// `t_i = ⌊(t+1)/2⌋`, `t_r = t + 1 - t_i`.
pub fn split_radii(t: usize) -> (usize, usize) {
    let ti = (t + 1) / 2;
    (ti, t + 1 - ti)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `S(ρ) = {(ρ + j) mod M : j < 2r}`.
pub fn valid_column_set(row: usize, block: usize, r: usize) -> BTreeSet<usize> {
    (0..2 * r).map(|j| (row + j) % block).collect()
}

/// Checks that no two redundancy bits of the same row share a column of the
/// column redundancy block under the low-error-floor permutations.
pub fn spreading_property_holds(block: usize, r: usize) -> bool {
    if 2 * r > block {
        return false;
    }
    let Ok((e1, e2)) = crate::ff::ff_low_ef_exponents(block, r) else {
        return false;
    };
    let t1 = crate::ff::ff_permutation_targets(block, &e1);
    let t2 = crate::ff::ff_permutation_targets(block, &e2);
    (0..block).all(|rho| {
        let mut cols: Vec<usize> = (0..r)
            .map(|b| t1[b * block + rho] % block)
            .chain((0..r).map(|b| t2[b * block + rho] % block))
            .collect();
        cols.sort_unstable();
        cols.windows(2).all(|w| w[0] != w[1])
    })
}

/// `BKER ≈ C(M, t_r) C(2r, t_r) p^{t_r(t+1)}`, `BER ≈ BKER t_i t_r / M²`.
pub fn ff_floor(block: usize, r: usize, t: usize, p: f64) -> FloorEstimate {
    let (ti, tr) = split_radii(t);
    let count = binomial(block, tr) * binomial(2 * r, tr);
    let bker = big_to_f64(&count) * p.powi((tr * (t + 1)) as i32);
    let ber = bker * (ti * tr) as f64 / (block * block) as f64;
    FloorEstimate { family: Family::Ff, p, bker, ber, t_i: ti, t_r: tr }
}

/// Multiplicity of the staircase minimal stall:
/// `C(M, t+1) Σ_{k=0}^{t} C(M, k) C(M, t+1-k)`.
pub fn staircase_stall_count(block: usize, t: usize) -> BigUint {
    let sum: BigUint = (0..=t).map(|k| binomial(block, k) * binomial(block, t + 1 - k)).sum();
    binomial(block, t + 1) * sum
}

/// `BKER ≈ count · p^{(t+1)²}`, `BER ≈ BKER (t+1)² / M²`.
pub fn pff_floor(block: usize, t: usize, p: f64) -> FloorEstimate {
    let (ti, tr) = split_radii(t);
    let w = (t + 1) * (t + 1);
    let bker = big_to_f64(&staircase_stall_count(block, t)) * p.powi(w as i32);
    let ber = bker * w as f64 / (block * block) as f64;
    FloorEstimate { family: Family::Pff, p, bker, ber, t_i: ti, t_r: tr }
}

/// The conventional staircase code shares the PFF minimal stall.
pub fn sc_floor(block: usize, t: usize, p: f64) -> FloorEstimate {
    FloorEstimate { family: Family::Sc, ..pff_floor(block, t, p) }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// The unique `p ∈ [0, 1/2]` with `h(p) = x`, by bisection.
pub fn inverse_binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::params(format!("entropy {x} outside [0, 1]")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

/// Inverse of `erfc` on `(0, 2)`: bracketed bisection, then Newton steps.
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::params(format!("erfc_inv argument {y} outside (0, 2)")));
    }
    // erfc is decreasing; bracket the root
    let (mut lo, mut hi) = (-6.0f64, 6.0f64);
    while erfc(hi) > y {
        hi *= 2.0;
    }
    while erfc(lo) < y {
        lo *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if erfc(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
    for _ in 0..3 {
        let d = -two_over_sqrt_pi * (-x * x).exp();
        if d == 0.0 {
            break;
        }
        let step = (erfc(x) - y) / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    Ok(x)
}

/// Net-coding-gap gap to capacity in dB, reported as a magnitude.
pub fn ncg_gap(rate: f64, p_in: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::params(format!("rate {rate} outside (0, 1)")));
    }
    if !(p_in > 0.0 && p_in < 0.5) {
        return Err(Error::params(format!("input BER {p_in} outside (0, 1/2)")));
    }
    let p_shannon = inverse_binary_entropy(1.0 - rate)?;
    let a = 20.0 * erfc_inv(2.0 * p_shannon)?.log10();
    let b = 20.0 * erfc_inv(2.0 * p_in)?.log10();
    Ok((a - b).abs())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StallPattern {
    pub family: Family,
    /// Frame positions of the channel errors.
    pub errors: Vec<(usize, usize, usize)>,
}

impl StallPattern {
    pub fn weight(&self) -> usize {
        self.errors.len()
    }

    pub fn addrs(&self) -> Vec<Addr> {
        self.errors.iter().map(|&(m, i, j)| Addr::new(m, i, j)).collect()
    }

    pub fn without(&self, index: usize) -> StallPattern {
        let mut errors = self.errors.clone();
        errors.remove(index);
        StallPattern { family: self.family, errors }
    }
}

/// Outcome of decoding a clean frame plus an injected pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InjectionOutcome {
    /// The decoder left exactly the injected errors in place.
    Stalled,
    /// Positions still wrong after decoding (empty when fully corrected).
    Corrected(Vec<Addr>),
}

/// Decodes `clean + pattern` and compares with `clean`.
pub fn inject_and_decode(codec: &dyn FrameCodec, clean: &Frame, pattern: &StallPattern) -> InjectionOutcome {
    let mut noisy = clean.clone();
    let addrs = pattern.addrs();
    for &a in &addrs {
        noisy.flip(a);
    }
    codec.decode(&mut noisy);
    let mut residual = clean.diff(&noisy);
    let mut injected = addrs;
    injected.sort_by_key(|a| (a.mat, a.row, a.col));
    residual.sort_by_key(|a| (a.mat, a.row, a.col));
    if !injected.is_empty() && residual == injected {
        InjectionOutcome::Stalled
    } else {
        InjectionOutcome::Corrected(residual)
    }
}

/// True when the pattern is a decoder fixed point and removing any single
/// error lets the decoder clear the rest.
pub fn is_minimal_stall(codec: &dyn FrameCodec, pattern: &StallPattern) -> bool {
    let zero = codec.empty_frame();
    if inject_and_decode(codec, &zero, pattern) != InjectionOutcome::Stalled {
        return false;
    }
    (0..pattern.weight())
        .all(|i| inject_and_decode(codec, &zero, &pattern.without(i)) == InjectionOutcome::Corrected(Vec::new()))
}

const STALL_RESEEDS: usize = 256;

/// Staircase stall on the pair `(prev, cur)` of stored blocks: `t + 1`
/// codeword indices `ρ`, `k` columns in `cur` and `t + 1 - k` rows in
/// `prev`. Positions must be information bits: `ρ < prev_info_cols` and
/// columns of `cur` below `cur_info_cols`.
fn staircase_stall(
    family: Family,
    prev: usize,
    cur: usize,
    block: usize,
    t: usize,
    limits: (usize, usize),
    rng: &mut impl Rng,
) -> StallPattern {
    let (prev_info_cols, cur_info_cols) = limits;
    let k = rng.gen_range(0..=t + 1);
    let rows: Vec<usize> = rand::seq::index::sample(rng, prev_info_cols, t + 1).into_vec();
    let cur_cols: Vec<usize> = rand::seq::index::sample(rng, cur_info_cols, k).into_vec();
    let prev_rows: Vec<usize> = rand::seq::index::sample(rng, block, t + 1 - k).into_vec();
    let mut errors = Vec::with_capacity((t + 1) * (t + 1));
    for &rho in &rows {
        errors.extend(cur_cols.iter().map(|&c| (cur, rho, c)));
        errors.extend(prev_rows.iter().map(|&c| (prev, c, rho)));
    }
    errors.sort_unstable();
    StallPattern { family, errors }
}

fn first_verified(
    codec: &dyn FrameCodec,
    seed: u64,
    mut make: impl FnMut(&mut ChaCha8Rng) -> Option<StallPattern>,
) -> Result<StallPattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..STALL_RESEEDS {
        if let Some(p) = make(&mut rng) {
            if is_minimal_stall(codec, &p) {
                return Ok(p);
            }
        }
    }
    Err(Error::Construction(format!("no verified minimal stall pattern after {STALL_RESEEDS} draws")))
}

/// Minimal stall of weight `(t+1)²` on blocks `B_1, B_2` of the frame.
pub fn sc_minimal_stall(code: &StaircaseCode, seed: u64) -> Result<StallPattern> {
    if code.blocks() < 2 {
        return Err(Error::params("stall needs at least two blocks"));
    }
    let (mb, r, t) = (code.block(), code.component().r(), code.component().t());
    let (prev, cur) = if code.blocks() >= 3 { (1, 2) } else { (0, 1) };
    first_verified(code, seed, |rng| Some(staircase_stall(Family::Sc, prev, cur, mb, t, (mb - r, mb - r), rng)))
}

/// Minimal stall of weight `(t+1)²`, all information bits. With `L ≥ 3` it
/// sits on two standard blocks; otherwise on the information block of the
/// first period and the block after it.
pub fn pff_minimal_stall(code: &PffCode, seed: u64) -> Result<StallPattern> {
    let c = code.construction();
    let (mb, r, l, t) = (c.block(), c.r(), c.propagation(), c.row_code().t());
    let w = mb - 2 * r;
    // period i occupies mats (L+1)i .. (L+1)i + L: standard blocks, then the
    // stored self-protected block, then the information block
    let (prev, cur, limits) = match l {
        1 | 2 if code.periods() < 2 => return Err(Error::params("stall needs two periods when L < 3")),
        1 => (1, 2, (mb, w)),
        2 => (2, 3, (mb, mb - r)),
        _ => (0, 1, (mb - r, mb - r)),
    };
    first_verified(code, seed, |rng| Some(staircase_stall(Family::Pff, prev, cur, mb, t, limits, rng)))
}

/// Feed-forward minimal stall of weight `t_r (t+1)` on the first block of
/// pair `j` (the middle pair of the frame): `t_r` rows and `t_r` columns,
/// each row with `t_i` information errors and one redundancy error per
/// chosen column.
pub fn ff_minimal_stall(code: &FfCode, seed: u64) -> Result<StallPattern> {
    let c = code.construction();
    let (mb, r, t) = (c.block(), c.r(), c.row_code().t());
    let (ti, tr) = split_radii(t);
    let j = code.pairs() / 2;
    let (b1, y, pc) = (4 * j, 4 * j + 2, 4 * j + 3);
    first_verified(code, seed, |rng| {
        let base = rng.gen_range(0..mb);
        let spread = (2 * r).saturating_sub(tr).max(tr);
        let offsets: Vec<usize> = rand::seq::index::sample(rng, spread.min(mb), tr).into_vec();
        let rows: Vec<usize> = offsets.iter().map(|&o| (base + o) % mb).collect();
        // columns reached by every chosen row's redundancy
        let reach = |rho: usize| -> Vec<(usize, usize, usize)> {
            (0..r)
                .map(|b| {
                    let (i, col) = c.x_source(rho, b);
                    (y, i, col)
                })
                .chain((0..r).map(|b| {
                    let (i, col) = c.pr_source(rho, b);
                    (pc, i, col)
                }))
                .collect()
        };
        let sets: Vec<Vec<(usize, usize, usize)>> = rows.iter().map(|&rho| reach(rho)).collect();
        let mut common: Vec<usize> = sets[0].iter().map(|e| e.2).collect();
        common.retain(|col| sets.iter().all(|s| s.iter().any(|e| e.2 == *col)));
        common.sort_unstable();
        common.dedup();
        if common.len() < tr {
            return None;
        }
        let cols: Vec<usize> = common.choose_multiple(rng, tr).copied().collect();
        let mut errors = Vec::new();
        for (a, (&rho, set)) in rows.iter().zip(&sets).enumerate() {
            for (bi, &col) in cols.iter().enumerate() {
                // grid minus the diagonal when t_i < t_r
                if ti == tr || a != bi {
                    errors.push((b1, rho, col));
                }
                errors.push(*set.iter().find(|e| e.2 == col).expect("column reachable"));
            }
        }
        errors.sort_unstable();
        errors.dedup();
        (errors.len() == tr * (t + 1)).then_some(StallPattern { family: Family::Ff, errors })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii() {
        assert_eq!(split_radii(3), (2, 2));
        assert_eq!(split_radii(4), (2, 3));
        assert_eq!(split_radii(1), (1, 1));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(72, 2), BigUint::from(2556u32));
        assert_eq!(binomial(48, 2), BigUint::from(1128u32));
        assert_eq!(binomial(5, 7), BigUint::from(0u32));
        assert_eq!(binomial(420, 4), BigUint::from(1_278_098_745u64));
    }

    #[test]
    fn column_sets() {
        assert_eq!(valid_column_set(0, 10, 2), BTreeSet::from([0, 1, 2, 3]));
        assert_eq!(valid_column_set(9, 10, 2), BTreeSet::from([9, 0, 1, 2]));
        assert_eq!(valid_column_set(3, 5, 4).len(), 5);
    }

    #[test]
    fn entropy_inverse() {
        for x in [1e-6, 0.01, 0.25, 0.5, 0.811, 0.99] {
            let p = inverse_binary_entropy(x).unwrap();
            assert!((binary_entropy(p) - x).abs() < 1e-12, "{x}");
        }
        assert!(inverse_binary_entropy(1.5).is_err());
    }

    #[test]
    fn erfc_inverse() {
        for y in [1e-12, 1e-5, 0.036, 0.5, 1.0, 1.7, 1.999] {
            let x = erfc_inv(y).unwrap();
            assert!((erfc(x) - y).abs() < 1e-12, "{y}");
        }
        assert!(erfc_inv(0.0).is_err());
        assert!(erfc_inv(2.0).is_err());
    }
}
