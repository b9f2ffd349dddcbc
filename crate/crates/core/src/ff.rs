//! Feed-forward staircase codes.
//!
//! Blocks are grouped in pairs `(B_{2j+1}, B_{2j+2})`. The rows of
//! `[B_{2j} B_{2j+1} X P̃_r]` are row-code codewords and the columns of
//! `[B_{2j+1}; B_{2j+2}; Y; P̃_c]` are column-code codewords, where the
//! punctured `X`, `P̃_r` are permuted transposes of the transmitted `Y`, `P̃_c`:
//! `Y = π_1(X)ᵀ` and `P̃_c = π_2(P̃_r)ᵀ`. Each `π` permutes column `b` of an
//! `M × r` matrix cyclically by `E_M^{e_b}`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bch::{CodeRole, ColumnGenerator, ComponentCode};
use crate::codec::{DecoderConfig, FrameCodec, Schedule};
use crate::engine::{Addr, Codeword, Frame, Layout};
use crate::error::{Error, Result};
use crate::galois::GaloisField;
use crate::gf2::{BitMatrix, VecMapping};
use crate::params::Family;

/// Exponents of the low-error-floor permutations, `e_b = M - 1 - b` for `π_1`
/// and `M - r - 1 - b` for `π_2`. Requires `2r < M`.
pub fn ff_low_ef_exponents(block: usize, r: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if 2 * r >= block {
        return Err(Error::params(format!("low error floor permutations need 2r < M (r={r}, M={block})")));
    }
    let p1 = (0..r).map(|b| block - 1 - b).collect();
    let p2 = (0..r).map(|b| block - r - 1 - b).collect();
    Ok((p1, p2))
}

/// `Π = diag(E_M^{e_0}, ..., E_M^{e_{r-1}})`.
pub fn ff_permutation_matrix(block: usize, exponents: &[usize]) -> BitMatrix {
    let blocks: Vec<BitMatrix> = exponents.iter().map(|&e| BitMatrix::elementary_perm(block, e)).collect();
    BitMatrix::block_diag(&blocks).expect("equal blocks")
}

/// `targets[src] = dst` of `Π` acting on `vec(X)` (column-wise, `M × r`).
pub fn ff_permutation_targets(block: usize, exponents: &[usize]) -> Vec<usize> {
    let mut t = vec![0; block * exponents.len()];
    for (b, &e) in exponents.iter().enumerate() {
        for i in 0..block {
            // (E^e x)_i = x_{(i + e) mod M}
            t[b * block + (i + e) % block] = b * block + i;
        }
    }
    t
}

fn invert_targets(t: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; t.len()];
    for (src, &dst) in t.iter().enumerate() {
        inv[dst] = src;
    }
    inv
}

/// Targets of `Π_T` mapping `vec(Y)` to `vec(Yᵀ)` for `rows × cols` `Y`.
fn transpose_targets(rows: usize, cols: usize) -> Vec<usize> {
    let mut t = vec![0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            t[j * rows + i] = i * cols + j;
        }
    }
    t
}

/// `targets` of the product `P Q` (apply `Q` first).
fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

/// `A = I_M ⊗ F_rᵀ + Π_T Π_2 Π_T (I_M ⊗ G_rᵀ) Π_T Π_1⁻¹ Π_T`, the matrix of
/// `Y ↦ F_rᵀ Y + π_2(π_1⁻¹(Yᵀ) G_r)ᵀ` under column-wise vectorization of the
/// `r × M` matrix `Y`. Transposition permutations alternate between the
/// `r × M` and `M × r` shapes.
pub fn ff_build_a(gr: &BitMatrix, fr: &BitMatrix, block: usize, exps1: &[usize], exps2: &[usize]) -> BitMatrix {
    let r = gr.rows();
    let t_rm = transpose_targets(r, block);
    let t_mr = transpose_targets(block, r);
    let pi1_inv = invert_targets(&ff_permutation_targets(block, exps1));
    let pi2 = ff_permutation_targets(block, exps2);
    let left = compose(&t_mr, &compose(&pi2, &t_rm));
    let right = compose(&t_mr, &compose(&pi1_inv, &t_rm));
    let right_inv = invert_targets(&right);

    let n = r * block;
    let mut a = BitMatrix::identity(block).kron(&fr.transpose());
    let grt = gr.transpose();
    // (L K R)(left[i], right⁻¹[j]) = K(i, j) for permutation matrices L, R
    for blk in 0..block {
        for i in 0..r {
            for j in 0..r {
                if grt.get(i, j) {
                    let (ki, kj) = (blk * r + i, blk * r + j);
                    a.flip(left[ki], right_inv[kj]);
                }
            }
        }
    }
    debug_assert_eq!(a.shape(), (n, n));
    a
}

/// Where the permutation exponents came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PermutationSource {
    LowErrorFloor,
    Random { seed: u64, attempt: usize },
    Given,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationSearch {
    pub seed: u64,
    pub attempts: usize,
}

impl Default for PermutationSearch {
    fn default() -> Self {
        PermutationSearch { seed: 1, attempts: 64 }
    }
}

/// Redundancy of one encoded pair. `x` and `pr` are punctured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FfPairRedundancy {
    pub y: BitMatrix,
    pub pc: BitMatrix,
    pub x: BitMatrix,
    pub pr: BitMatrix,
}

/// Everything fixed by `(m, t, s)`, the column generator and the
/// permutations: component codes, parity partitions and `A⁻¹`.
#[derive(Debug, Clone)]
pub struct FfConstruction {
    row: ComponentCode,
    col: ComponentCode,
    block: usize,
    r: usize,
    gi: BitMatrix,
    gr: BitMatrix,
    fi: BitMatrix,
    fr: BitMatrix,
    exps1: Vec<usize>,
    exps2: Vec<usize>,
    pi1: Vec<usize>,
    pi2: Vec<usize>,
    a_inv: BitMatrix,
    source: PermutationSource,
}

impl FfConstruction {
    pub fn codes(m: u32, t: usize, s: usize, column: ColumnGenerator) -> Result<(ComponentCode, ComponentCode)> {
        let field = Arc::new(GaloisField::new(m)?);
        let row = ComponentCode::row(field.clone(), t, s)?;
        let col = ComponentCode::column(field, t, s, column)?;
        let (k, r) = (row.k(), row.r());
        if k <= r || (k - r) % 2 != 0 {
            return Err(Error::params(format!("feed-forward code needs k - r even and positive (k={k}, r={r})")));
        }
        Ok((row, col))
    }

    /// Builds the construction, trying the low-error-floor permutations
    /// first (when `2r < M`) and then seeded random exponents until `A` is
    /// invertible.
    pub fn build(m: u32, t: usize, s: usize, column: ColumnGenerator, search: PermutationSearch) -> Result<Self> {
        let (row, col) = Self::codes(m, t, s, column)?;
        let block = (row.k() - row.r()) / 2;
        let r = row.r();
        if let Ok((e1, e2)) = ff_low_ef_exponents(block, r) {
            match Self::with_exponents(row.clone(), col.clone(), e1, e2, PermutationSource::LowErrorFloor) {
                Ok(c) => return Ok(c),
                Err(Error::Singular { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        for attempt in 0..search.attempts {
            let e1: Vec<usize> = (0..r).map(|_| rng.gen_range(0..block)).collect();
            let e2: Vec<usize> = (0..r).map(|_| rng.gen_range(0..block)).collect();
            let source = PermutationSource::Random { seed: search.seed, attempt };
            match Self::with_exponents(row.clone(), col.clone(), e1, e2, source) {
                Ok(c) => return Ok(c),
                Err(Error::Singular { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Construction(format!(
            "no invertible A found in {} permutation attempts (seed {})",
            search.attempts, search.seed
        )))
    }

    pub fn with_exponents(
        row: ComponentCode,
        col: ComponentCode,
        exps1: Vec<usize>,
        exps2: Vec<usize>,
        source: PermutationSource,
    ) -> Result<Self> {
        let a = Self::a_matrix_for(&row, &col, &exps1, &exps2)?;
        let a_inv = a.invert()?;
        Self::from_inverse(row, col, exps1, exps2, a_inv, source)
    }

    fn a_matrix_for(row: &ComponentCode, col: &ComponentCode, exps1: &[usize], exps2: &[usize]) -> Result<BitMatrix> {
        let rp = row.parity_partition()?;
        let cp = col.parity_partition()?;
        let block = (row.k() - row.r()) / 2;
        if exps1.len() != row.r() || exps2.len() != row.r() || exps1.iter().chain(exps2).any(|&e| e >= block) {
            return Err(Error::params("permutation exponents must be r values below M"));
        }
        Ok(ff_build_a(&rp.gr, &cp.gr, block, exps1, exps2))
    }

    /// Assembles a construction from a previously computed `A⁻¹`.
    pub fn from_inverse(
        row: ComponentCode,
        col: ComponentCode,
        exps1: Vec<usize>,
        exps2: Vec<usize>,
        a_inv: BitMatrix,
        source: PermutationSource,
    ) -> Result<Self> {
        if row.n() != col.n() || row.k() != col.k() {
            return Err(Error::params("row and column codes must share n and k"));
        }
        let rp = row.parity_partition()?;
        let cp = col.parity_partition()?;
        let r = row.r();
        let block = (row.k() - r) / 2;
        if a_inv.shape() != (r * block, r * block) {
            return Err(Error::dims("A inverse", a_inv.shape(), (r * block, r * block)));
        }
        let pi1 = ff_permutation_targets(block, &exps1);
        let pi2 = ff_permutation_targets(block, &exps2);
        Ok(FfConstruction {
            row,
            col,
            block,
            r,
            gi: rp.gi,
            gr: rp.gr,
            fi: cp.gi,
            fr: cp.gr,
            exps1,
            exps2,
            pi1,
            pi2,
            a_inv,
            source,
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

    pub fn exponents(&self) -> (&[usize], &[usize]) {
        (&self.exps1, &self.exps2)
    }

    pub fn source(&self) -> PermutationSource {
        self.source
    }

    pub fn a_inverse(&self) -> &BitMatrix {
        &self.a_inv
    }

    /// Recomputes `A` from the stored exponents.
    pub fn a_matrix(&self) -> BitMatrix {
        ff_build_a(&self.gr, &self.fr, self.block, &self.exps1, &self.exps2)
    }

    pub fn permutation_matrices(&self) -> (BitMatrix, BitMatrix) {
        (ff_permutation_matrix(self.block, &self.exps1), ff_permutation_matrix(self.block, &self.exps2))
    }

    /// Entry of `Y` (row, column) carrying `X(ρ, b)`.
    #[inline]
    pub fn x_source(&self, rho: usize, b: usize) -> (usize, usize) {
        let q = self.pi1[b * self.block + rho];
        (q / self.block, q % self.block)
    }

    /// Entry of `P̃_c` carrying `P̃_r(ρ, b)`.
    #[inline]
    pub fn pr_source(&self, rho: usize, b: usize) -> (usize, usize) {
        let q = self.pi2[b * self.block + rho];
        (q / self.block, q % self.block)
    }

    /// `π(Z)` for an `M × r` matrix, column `b` shifted by its exponent.
    fn apply(&self, targets: &[usize], z: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.block, self.r);
        for b in 0..self.r {
            for i in 0..self.block {
                if z.get(i, b) {
                    let q = targets[b * self.block + i];
                    out.set(q % self.block, q / self.block, true);
                }
            }
        }
        out
    }

    /// Encodes one pair. `prev` is `B_{2j}` (all-zero for the first pair).
    pub fn encode_pair(&self, prev: Option<&BitMatrix>, b1: &BitMatrix, b2: &BitMatrix) -> Result<FfPairRedundancy> {
        let (mb, r) = (self.block, self.r);
        for b in [Some(b1), Some(b2), prev].into_iter().flatten() {
            if b.shape() != (mb, mb) {
                return Err(Error::dims("encode_pair", b.shape(), (mb, mb)));
            }
        }
        let zero = BitMatrix::zeros(mb, mb);
        let b0 = prev.unwrap_or(&zero);
        let p_r = b0.hstack(b1)?.mul(&self.gi)?;
        let p_c = self.fi.transpose().mul(&b1.vstack(b2)?)?;
        let cm = VecMapping::column_wise(r, mb);
        let rhs = p_c.add(&self.apply(&self.pi2, &p_r).transpose())?;
        let y = BitMatrix::unvec(&self.a_inv.mul_vector(&rhs.vec(cm)?)?, cm)?;
        let mut x = BitMatrix::zeros(mb, r);
        for rho in 0..mb {
            for b in 0..r {
                let (i, j) = self.x_source(rho, b);
                x.set(rho, b, y.get(i, j));
            }
        }
        let pr = p_r.add(&x.mul(&self.gr)?)?;
        let pc = p_c.add(&self.fr.transpose().mul(&y)?)?;
        Ok(FfPairRedundancy { y, pc, x, pr })
    }
}

/// Feed-forward frame of `J` pairs, transmitted per pair as
/// `B_{2j+1}, B_{2j+2}, Y_j, P̃_c,j`.
#[derive(Debug, Clone)]
pub struct FfCode {
    cons: Arc<FfConstruction>,
    pairs: usize,
    config: DecoderConfig,
    layout: Layout,
    info: Vec<Addr>,
}

impl FfCode {
    pub fn new(cons: Arc<FfConstruction>, pairs: usize, config: DecoderConfig) -> Result<Self> {
        if pairs == 0 {
            return Err(Error::params("frame needs at least one pair"));
        }
        let (mb, r) = (cons.block, cons.r);
        let mut layout = Layout::default();
        let mut info = Vec::with_capacity(pairs * 2 * mb * mb);
        for j in 0..pairs {
            let (b1, b2, y, pc) = (4 * j, 4 * j + 1, 4 * j + 2, 4 * j + 3);
            let b0 = if j == 0 { None } else { Some(4 * j - 3) };
            let rows: Vec<Codeword> = (0..mb)
                .map(|rho| {
                    let mut addrs = Vec::with_capacity(2 * mb + 2 * r);
                    addrs.extend((0..mb).map(|c| b0.map_or(Addr::ZERO, |m| Addr::new(m, rho, c))));
                    addrs.extend((0..mb).map(|c| Addr::new(b1, rho, c)));
                    addrs.extend((0..r).map(|b| {
                        let (i, k) = cons.x_source(rho, b);
                        Addr::new(y, i, k)
                    }));
                    addrs.extend((0..r).map(|b| {
                        let (i, k) = cons.pr_source(rho, b);
                        Addr::new(pc, i, k)
                    }));
                    Codeword { side: CodeRole::Row, addrs }
                })
                .collect();
            let cols: Vec<Codeword> = (0..mb)
                .map(|c| {
                    let mut addrs = Vec::with_capacity(2 * mb + 2 * r);
                    addrs.extend((0..mb).map(|i| Addr::new(b1, i, c)));
                    addrs.extend((0..mb).map(|i| Addr::new(b2, i, c)));
                    addrs.extend((0..r).map(|i| Addr::new(y, i, c)));
                    addrs.extend((0..r).map(|i| Addr::new(pc, i, c)));
                    Codeword { side: CodeRole::Column, addrs }
                })
                .collect();
            layout.begin_unit();
            match config.schedule {
                Schedule::ColumnsFirst => {
                    layout.push_group(cols);
                    layout.push_group(rows);
                }
                Schedule::RowsFirst => {
                    layout.push_group(rows);
                    layout.push_group(cols);
                }
            }
            for m in [b1, b2] {
                for i in 0..mb {
                    info.extend((0..mb).map(|c| Addr::new(m, i, c)));
                }
            }
        }
        Ok(FfCode { cons, pairs, config, layout, info })
    }

    pub fn construction(&self) -> &Arc<FfConstruction> {
        &self.cons
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }
}

impl FrameCodec for FfCode {
    fn family(&self) -> Family {
        Family::Ff
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
        let (mb, r) = (self.cons.block, self.cons.r);
        (0..self.pairs).flat_map(|_| [(mb, mb), (mb, mb), (r, mb), (r, mb)]).collect()
    }

    fn fill_redundancy(&self, frame: &mut Frame) -> Result<()> {
        for j in 0..self.pairs {
            let red = {
                let prev = if j == 0 { None } else { Some(&frame.mats[4 * j - 3]) };
                self.cons.encode_pair(prev, &frame.mats[4 * j], &frame.mats[4 * j + 1])?
            };
            frame.mats[4 * j + 2] = red.y;
            frame.mats[4 * j + 3] = red.pc;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_ef_exponents_and_errors() {
        let (p1, p2) = ff_low_ef_exponents(13, 6).unwrap();
        assert_eq!(p1, vec![12, 11, 10, 9, 8, 7]);
        assert_eq!(p2, vec![6, 5, 4, 3, 2, 1]);
        assert!(ff_low_ef_exponents(3, 4).is_err());
        assert!(ff_low_ef_exponents(12, 6).is_err());
    }

    #[test]
    fn targets_match_matrix() {
        let exps = [2, 0, 4];
        let m = ff_permutation_matrix(5, &exps);
        assert_eq!(m.perm_targets().unwrap(), ff_permutation_targets(5, &exps));
    }

    #[test]
    fn low_ef_addresses_follow_diagonals() {
        let c = FfConstruction::build(6, 1, 25, ColumnGenerator::Reciprocal, PermutationSearch::default()).unwrap();
        assert_eq!(c.source(), PermutationSource::LowErrorFloor);
        let (mb, r) = (c.block(), c.r());
        for rho in 0..mb {
            for b in 0..r {
                assert_eq!(c.x_source(rho, b), (b, (rho + b + 1) % mb));
                assert_eq!(c.pr_source(rho, b), (b, (rho + r + 1 + b) % mb));
            }
        }
    }
}
