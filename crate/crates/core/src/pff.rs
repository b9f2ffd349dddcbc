//! Partial feed-forward staircase codes.
//!
//! A period holds `L + 1` blocks: `L - 1` standard staircase blocks, one
//! self-protected block `D` and one block of information only. In the
//! drawn orientation `D` has three row bands: `M - 2r` information rows,
//! `Y = [Y_1 Y_2]` and `P̃_c = [P̃_c1 P̃_c2]`. It is transmitted transposed,
//! `S = Dᵀ`, so that every pair of consecutive stored blocks is read as the
//! rows of `[B_prevᵀ B_cur]`:
//!
//! * standard pairs use the row code with `2r` leading zeros;
//! * the pair ending in `S` carries the column code (also with `2r` leading
//!   zeros), whose codewords are the columns of `[B_prev; D]`;
//! * the pair `(S, B_info)` carries the row code without extra shortening,
//!   with `X = Yᵀ` and `P̃_r = P̃_cᵀ` punctured. Within it the last `2r`
//!   columns of `D` are reordered by `Π`; nothing else sees `Π`.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bch::{CodeRole, ColumnGenerator, ComponentCode};
use crate::codec::{staircase_words, DecoderConfig, FrameCodec};
use crate::engine::{Addr, Codeword, Frame, Layout};
use crate::error::{Error, Result};
use crate::galois::GaloisField;
use crate::gf2::{BitMatrix, VecMapping};
use crate::params::Family;

/// `B = [𝓢(A) E^a]_{a<2r} + [I_r ⊗ G̃_Bᵀ; F_rᵀ ⊗ G̃_Bᵀ]`, the matrix of
/// `Y_2 ↦ Y_2ᵀAᵀ + [I; F_rᵀ] Y_2 G̃_B` under row-wise vectorization.
pub fn pff_build_b(a: &BitMatrix, fr: &BitMatrix, gb_tilde: &BitMatrix) -> BitMatrix {
    let r = a.rows();
    let n = 2 * r * r;
    let gbt = gb_tilde.transpose();
    let k = BitMatrix::identity(r).vstack(&fr.transpose()).expect("r columns");
    let mut b = k.kron(&gbt);
    // row a·r + ρ of the stacked 𝓢(A) E^a has A(ρ, i) at column 2r·i + a
    for blk in 0..2 * r {
        for rho in 0..r {
            for i in 0..r {
                if a.get(rho, i) {
                    b.flip(blk * r + rho, 2 * r * i + blk);
                }
            }
        }
    }
    debug_assert_eq!(b.shape(), (n, n));
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiSearch {
    pub seed: u64,
    pub attempts: usize,
}

impl Default for PiSearch {
    fn default() -> Self {
        PiSearch { seed: 1, attempts: 256 }
    }
}

/// One encoded period, blocks in transmission order (the self-protected
/// block stored transposed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PffPeriod {
    pub blocks: Vec<BitMatrix>,
}

#[derive(Debug, Clone)]
pub struct PffConstruction {
    row: ComponentCode,
    col: ComponentCode,
    block: usize,
    r: usize,
    propagation: usize,
    gi: BitMatrix,
    gp_std: BitMatrix,
    fi: BitMatrix,
    fr: BitMatrix,
    a_inv: BitMatrix,
    /// `targets[src] = dst` of `Π`.
    pi: Vec<usize>,
    gi_tilde: BitMatrix,
    b_inv: BitMatrix,
    attempt: usize,
    seed: u64,
}

impl PffConstruction {
    pub fn codes(m: u32, t: usize, s: usize) -> Result<(ComponentCode, ComponentCode)> {
        let field = Arc::new(GaloisField::new(m)?);
        let row = ComponentCode::row(field.clone(), t, s)?;
        let col = ComponentCode::column(field, t, s, ColumnGenerator::Reciprocal)?;
        Ok((row, col))
    }

    /// Stage-1 matrix `A = G_rᵀ + F_rᵀ`.
    pub fn stage1_matrix(row: &ComponentCode, col: &ComponentCode) -> Result<BitMatrix> {
        let gr = row.parity_partition()?.gr;
        let fr = col.parity_partition()?.gr;
        gr.transpose().add(&fr.transpose())
    }

    pub fn build(m: u32, t: usize, s: usize, propagation: usize, search: PiSearch) -> Result<Self> {
        let (row, col) = Self::codes(m, t, s)?;
        Self::with_codes(row, col, propagation, search)
    }

    /// Inverts `A`, then searches `Π` (identity first, then seeded shuffles)
    /// until `B` is invertible.
    pub fn with_codes(row: ComponentCode, col: ComponentCode, propagation: usize, search: PiSearch) -> Result<Self> {
        let a = Self::stage1_matrix(&row, &col)?;
        let a_inv = a.invert()?;
        let r = row.r();
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        let mut pi: Vec<usize> = (0..2 * r).collect();
        for attempt in 0..search.attempts.max(1) {
            if attempt > 0 {
                pi = (0..2 * r).collect();
                pi.shuffle(&mut rng);
            }
            let b = Self::stage2_matrix(&row, &col, &pi)?;
            if let Ok(b_inv) = b.invert() {
                return Self::assemble(row, col, propagation, a_inv, pi, b_inv, attempt, search.seed);
            }
        }
        Err(Error::Construction(format!(
            "no invertible B found in {} permutation attempts (seed {})",
            search.attempts, search.seed
        )))
    }

    /// Stage-2 matrix `B` for a given `Π`.
    pub fn stage2_matrix(row: &ComponentCode, col: &ComponentCode, pi: &[usize]) -> Result<BitMatrix> {
        let (_, gb, _) = Self::split_gi(row)?;
        let fr = col.parity_partition()?.gr;
        let a = Self::stage1_matrix(row, col)?;
        let gb_tilde = BitMatrix::from_perm_targets(pi).mul(&gb)?;
        Ok(pff_build_b(&a, &fr, &gb_tilde))
    }

    /// `G_i = [G_A; G_B; G_C]`.
    fn split_gi(row: &ComponentCode) -> Result<(BitMatrix, BitMatrix, BitMatrix)> {
        let gi = row.parity_partition()?.gi;
        let r = row.r();
        let block = Self::block_for(row)?;
        let ga = gi.submatrix(0..block - 2 * r, 0..r);
        let gb = gi.submatrix(block - 2 * r..block, 0..r);
        let gc = gi.submatrix(block..2 * block, 0..r);
        Ok((ga, gb, gc))
    }

    fn block_for(row: &ComponentCode) -> Result<usize> {
        let (k, r) = (row.k(), row.r());
        if k <= r || (k - r) % 2 != 0 {
            return Err(Error::params(format!("k - r must be even and positive (k={k}, r={r})")));
        }
        let block = (k - r) / 2;
        if block <= 2 * r {
            return Err(Error::params(format!("partial feed-forward code needs M > 2r (M={block}, r={r})")));
        }
        Ok(block)
    }

    /// Assembles a construction from precomputed inverses.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        row: ComponentCode,
        col: ComponentCode,
        propagation: usize,
        a_inv: BitMatrix,
        pi: Vec<usize>,
        b_inv: BitMatrix,
        attempt: usize,
        seed: u64,
    ) -> Result<Self> {
        if propagation == 0 {
            return Err(Error::params("propagation length must be at least 1"));
        }
        if row.n() != col.n() || row.k() != col.k() {
            return Err(Error::params("row and column codes must share n and k"));
        }
        let block = Self::block_for(&row)?;
        let r = row.r();
        if a_inv.shape() != (r, r) || b_inv.shape() != (2 * r * r, 2 * r * r) {
            return Err(Error::dims("stage inverses", a_inv.shape(), (r, r)));
        }
        let mut seen = vec![false; 2 * r];
        if pi.len() != 2 * r || pi.iter().any(|&d| d >= 2 * r || std::mem::replace(&mut seen[d], true)) {
            return Err(Error::params("Π must be a permutation of 2r positions"));
        }
        let rp = row.parity_partition()?;
        let cp = col.parity_partition()?;
        let (ga, gb, gc) = Self::split_gi(&row)?;
        let gb_tilde = BitMatrix::from_perm_targets(&pi).mul(&gb)?;
        let gi_tilde = ga.vstack(&gb_tilde)?.vstack(&gc)?;
        let gp_std = rp.gp.submatrix(2 * r..row.k(), 0..r);
        Ok(PffConstruction {
            row,
            col,
            block,
            r,
            propagation,
            gi: rp.gi,
            gp_std,
            fi: cp.gi,
            fr: cp.gr,
            a_inv,
            pi,
            gi_tilde,
            b_inv,
            attempt,
            seed,
        })
    }

    pub fn row_code(&self) -> &ComponentCode {
        &self.row
    }

    pub fn col_code(&self) -> &ComponentCode {
        &self.col
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn propagation(&self) -> usize {
        self.propagation
    }

    pub fn pi_targets(&self) -> &[usize] {
        &self.pi
    }

    pub fn pi_matrix(&self) -> BitMatrix {
        BitMatrix::from_perm_targets(&self.pi)
    }

    pub fn a_inverse(&self) -> &BitMatrix {
        &self.a_inv
    }

    pub fn b_inverse(&self) -> &BitMatrix {
        &self.b_inv
    }

    /// Search attempt that produced `Π` (0 is the identity) and its seed.
    pub fn search_origin(&self) -> (usize, u64) {
        (self.attempt, self.seed)
    }

    pub fn with_propagation(&self, propagation: usize) -> Result<Self> {
        if propagation == 0 {
            return Err(Error::params("propagation length must be at least 1"));
        }
        Ok(PffConstruction { propagation, ..self.clone() })
    }

    /// Information bits per stored block of a period.
    pub fn period_info_bits(&self) -> Vec<usize> {
        crate::params::pff_period_info_bits(self.block, self.r, self.propagation)
    }

    /// Standard block `[M_i | P_i]` with `P_i = [B_prevᵀ M_i] G_p[2r..k]`.
    pub fn encode_standard(&self, prev: &BitMatrix, info: &BitMatrix) -> Result<BitMatrix> {
        let (mb, r) = (self.block, self.r);
        if prev.shape() != (mb, mb) || info.shape() != (mb, mb - r) {
            return Err(Error::dims("encode_standard", info.shape(), (mb, mb - r)));
        }
        let parity = prev.transpose().hstack(info)?.mul(&self.gp_std)?;
        info.hstack(&parity)
    }

    /// Solves stages 1 and 2. `prev` is the block before the self-protected
    /// one, `sp_info` the `(M - 2r) × M` information rows of `D` and `info`
    /// the following information block. Returns `D` in drawn orientation.
    pub fn encode_self_protected(&self, prev: &BitMatrix, sp_info: &BitMatrix, info: &BitMatrix) -> Result<BitMatrix> {
        let (mb, r) = (self.block, self.r);
        let w = mb - 2 * r;
        if prev.shape() != (mb, mb) || info.shape() != (mb, mb) {
            return Err(Error::dims("encode_self_protected", prev.shape(), (mb, mb)));
        }
        if sp_info.shape() != (w, mb) {
            return Err(Error::dims("encode_self_protected", sp_info.shape(), (w, mb)));
        }
        let m11 = sp_info.submatrix(0..w, 0..w);
        let m12 = sp_info.submatrix(0..w, w..mb);
        let m01 = prev.submatrix(0..mb, 0..w);
        let m02 = prev.submatrix(0..mb, w..mb);
        let m21 = info.submatrix(0..w, 0..mb);
        let m22 = info.submatrix(w..mb, 0..mb);
        // F_i rows after the 2r structural zeros: [prev part; D part]
        let fi_prev_t = self.fi.submatrix(2 * r..2 * r + mb, 0..r).transpose();
        let fi_d_t = self.fi.submatrix(2 * r + mb..2 * mb, 0..r).transpose();

        // stage 1
        let m12_pi = m12.mul(&self.pi_matrix())?;
        let p_r1 = m11.hstack(&m12_pi)?.hstack(&m21)?.mul(&self.gi)?;
        let p_c1 = fi_prev_t.mul(&m01)?.add(&fi_d_t.mul(&m11)?)?;
        let y1 = self.a_inv.mul(&p_c1.add(&p_r1.transpose())?)?;
        let pc1 = p_c1.add(&self.fr.transpose().mul(&y1)?)?;

        // stage 2
        let p_c2 = fi_prev_t.mul(&m02)?.add(&fi_d_t.mul(&m12)?)?;
        let left = y1.vstack(&pc1)?;
        let mid = BitMatrix::zeros(r, 2 * r).vstack(&p_c2)?;
        let c = left.hstack(&mid)?.hstack(&m22)?.mul(&self.gi_tilde)?.add(&p_c2.transpose())?;
        let y = self.b_inv.mul_vector(&c.vec(VecMapping::row_wise(2 * r, r))?)?;
        let y2 = BitMatrix::unvec(&y, VecMapping::row_wise(r, 2 * r))?;
        let pc2 = p_c2.add(&self.fr.transpose().mul(&y2)?)?;

        let mut d = BitMatrix::zeros(mb, mb);
        d.paste(sp_info, 0, 0);
        d.paste(&y1, w, 0);
        d.paste(&y2, w, w);
        d.paste(&pc1, w + r, 0);
        d.paste(&pc2, w + r, w);
        Ok(d)
    }

    /// Encodes one period from its information blocks: `L - 1` blocks of
    /// `M × (M - r)`, then `(M - 2r) × M` rows of `D`, then `M × M`.
    pub fn encode_period(&self, prev: &BitMatrix, infos: &[BitMatrix]) -> Result<PffPeriod> {
        let l = self.propagation;
        if infos.len() != l + 1 {
            return Err(Error::params(format!("period needs {} information blocks, got {}", l + 1, infos.len())));
        }
        let mut blocks = Vec::with_capacity(l + 1);
        let mut last = prev.clone();
        for info in &infos[..l - 1] {
            let b = self.encode_standard(&last, info)?;
            last = b.clone();
            blocks.push(b);
        }
        let d = self.encode_self_protected(&last, &infos[l - 1], &infos[l])?;
        blocks.push(d.transpose());
        blocks.push(infos[l].clone());
        Ok(PffPeriod { blocks })
    }
}

/// Frame of whole periods, `(L + 1) · periods` stored blocks.
#[derive(Debug, Clone)]
pub struct PffCode {
    cons: Arc<PffConstruction>,
    periods: usize,
    config: DecoderConfig,
    layout: Layout,
    info: Vec<Addr>,
}

impl PffCode {
    pub fn new(cons: Arc<PffConstruction>, periods: usize, config: DecoderConfig) -> Result<Self> {
        if periods == 0 {
            return Err(Error::params("frame needs at least one period"));
        }
        let (mb, r, l) = (cons.block, cons.r, cons.propagation);
        let w = mb - 2 * r;
        let mut layout = Layout::default();
        let mut info = Vec::new();
        for p in 0..periods {
            let base = p * (l + 1);
            for i in 0..=l {
                let cur = base + i;
                let prev = cur.checked_sub(1);
                layout.begin_unit();
                if i + 1 < l {
                    layout.push_group(staircase_words(prev, cur, mb, 2 * r, CodeRole::Row));
                    for rho in 0..mb {
                        info.extend((0..mb - r).map(|c| Addr::new(cur, rho, c)));
                    }
                } else if i + 1 == l {
                    layout.push_group(staircase_words(prev, cur, mb, 2 * r, CodeRole::Column));
                    // D(ρ, c) is stored at S(c, ρ)
                    for rho in 0..w {
                        info.extend((0..mb).map(|c| Addr::new(cur, c, rho)));
                    }
                } else {
                    let s = cur - 1;
                    let words = (0..mb).map(|rho| {
                        let mut addrs = Vec::with_capacity(2 * mb + 2 * r);
                        // row ρ of D, last 2r columns seen through Π
                        addrs.extend((0..w).map(|c| Addr::new(s, c, rho)));
                        addrs.extend((0..2 * r).map(|q| Addr::new(s, w + cons.pi[q], rho)));
                        addrs.extend((0..mb).map(|c| Addr::new(cur, rho, c)));
                        // X(ρ, b) = D(M-2r+b, ρ), P̃_r(ρ, b) = D(M-r+b, ρ)
                        addrs.extend((0..2 * r).map(|b| Addr::new(s, rho, w + b)));
                        Codeword { side: CodeRole::Row, addrs }
                    });
                    layout.push_group(words.collect::<Vec<_>>());
                    for rho in 0..mb {
                        info.extend((0..mb).map(|c| Addr::new(cur, rho, c)));
                    }
                }
            }
        }
        Ok(PffCode { cons, periods, config, layout, info })
    }

    pub fn construction(&self) -> &Arc<PffConstruction> {
        &self.cons
    }

    pub fn periods(&self) -> usize {
        self.periods
    }
}

impl FrameCodec for PffCode {
    fn family(&self) -> Family {
        Family::Pff
    }

    fn row_code(&self) -> &ComponentCode {
        &self.cons.row
    }

    fn col_code(&self) -> &ComponentCode {
        &self.cons.col
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn config(&self) -> &DecoderConfig {
        &self.config
    }

    fn info_addrs(&self) -> &[Addr] {
        &self.info
    }

    fn frame_shape(&self) -> Vec<(usize, usize)> {
        let mb = self.cons.block;
        vec![(mb, mb); self.periods * (self.cons.propagation + 1)]
    }

    fn fill_redundancy(&self, frame: &mut Frame) -> Result<()> {
        let (mb, r, l) = (self.cons.block, self.cons.r, self.cons.propagation);
        let w = mb - 2 * r;
        let mut prev = BitMatrix::zeros(mb, mb);
        for p in 0..self.periods {
            let base = p * (l + 1);
            let mut infos = Vec::with_capacity(l + 1);
            for i in 0..l - 1 {
                infos.push(frame.mats[base + i].submatrix(0..mb, 0..mb - r));
            }
            infos.push(frame.mats[base + l - 1].transpose().submatrix(0..w, 0..mb));
            infos.push(frame.mats[base + l].clone());
            let period = self.cons.encode_period(&prev, &infos)?;
            for (i, b) in period.blocks.into_iter().enumerate() {
                frame.mats[base + i] = b;
            }
            prev = frame.mats[base + l].clone();
        }
        Ok(())
    }
}
