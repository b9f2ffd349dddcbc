//! Dense matrices over GF(2).
//!
//! Bits are packed row-major into `u64` words so that row operations are
//! word-level XORs. Vectors are single-column matrices.

use std::fmt;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Dense bit matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

/// Matrix/vector index bijection used by `vec` and `unvec`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecMapping {
    /// `v(i, j) = j * rows + i`
    ColumnWise { rows: usize, cols: usize },
    /// `v(i, j) = i * cols + j`
    RowWise { rows: usize, cols: usize },
}

impl VecMapping {
    pub fn column_wise(rows: usize, cols: usize) -> Self {
        VecMapping::ColumnWise { rows, cols }
    }

    pub fn row_wise(rows: usize, cols: usize) -> Self {
        VecMapping::RowWise { rows, cols }
    }

    pub fn shape(&self) -> (usize, usize) {
        match *self {
            VecMapping::ColumnWise { rows, cols } | VecMapping::RowWise { rows, cols } => {
                (rows, cols)
            }
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        match *self {
            VecMapping::ColumnWise { rows, .. } => j * rows + i,
            VecMapping::RowWise { cols, .. } => i * cols + j,
        }
    }

    #[inline]
    pub fn position(&self, v: usize) -> (usize, usize) {
        match *self {
            VecMapping::ColumnWise { rows, .. } => (v % rows, v / rows),
            VecMapping::RowWise { cols, .. } => (v / cols, v % cols),
        }
    }
}

#[inline]
fn words_for(cols: usize) -> usize {
    cols.div_ceil(64)
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = words_for(cols);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Column vector from 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut m = Self::zeros(bits.len(), 1);
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                m.set(i, 0, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.data[i * self.words_per_row + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn bit(&self, i: usize, j: usize) -> u8 {
        self.get(i, j) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.words_per_row + j / 64];
        let mask = 1u64 << (j % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize, j: usize) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.words_per_row + j / 64] ^= 1u64 << (j % 64);
    }

    #[inline]
    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    /// XORs row `src` into row `dst`.
    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words_per_row;
        if src == dst {
            self.data[dst * w..(dst + 1) * w].fill(0);
            return;
        }
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            (&lo[src * w..(src + 1) * w], &mut hi[..w])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * w);
            (&hi[..w], &mut lo[dst * w..(dst + 1) * w])
        };
        for (d, s) in b.iter_mut().zip(a) {
            *d ^= s;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words_per_row;
        for k in 0..w {
            self.data.swap(a * w + k, b * w + k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Bits of row `i` as 0/1 values.
    pub fn row_bits(&self, i: usize) -> Vec<u8> {
        (0..self.cols).map(|j| self.bit(i, j)).collect()
    }

    /// Bits of a column vector (or of column 0) as 0/1 values.
    pub fn col_bits(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.bit(i, j)).collect()
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let b = w.trailing_zeros() as usize;
                    t.set(wi * 64 + b, i, true);
                    w &= w - 1;
                }
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::dims("mat_mul", self.shape(), rhs.shape()));
        }
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        let w = rhs.words_per_row;
        for i in 0..self.rows {
            let dst = i * w;
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let k = wi * 64 + bits.trailing_zeros() as usize;
                    let src = rhs.row_words(k);
                    for (d, s) in out.data[dst..dst + w].iter_mut().zip(src) {
                        *d ^= s;
                    }
                    bits &= bits - 1;
                }
            }
        }
        Ok(out)
    }

    /// Product with a column vector, by row/vector dot products.
    pub fn mul_vector(&self, v: &BitMatrix) -> Result<BitMatrix> {
        if v.cols != 1 || v.rows != self.cols {
            return Err(Error::dims("mat_vec", self.shape(), v.shape()));
        }
        let mut packed = vec![0u64; self.words_per_row];
        for k in 0..v.rows {
            if v.get(k, 0) {
                packed[k / 64] |= 1u64 << (k % 64);
            }
        }
        let mut out = BitMatrix::zeros(self.rows, 1);
        for i in 0..self.rows {
            let parity = self
                .row_words(i)
                .iter()
                .zip(&packed)
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones());
            if parity & 1 == 1 {
                out.set(i, 0, true);
            }
        }
        Ok(out)
    }

    /// Entry-wise XOR.
    pub fn add(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::dims("mat_add", self.shape(), rhs.shape()));
        }
        let mut out = self.clone();
        out.add_assign(rhs);
        Ok(out)
    }

    /// In-place XOR; panics on shape mismatch.
    pub fn add_assign(&mut self, rhs: &BitMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in add_assign");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a ^= b;
        }
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(pivot) = (rank..m.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(pivot, rank);
            for r in rank + 1..m.rows {
                if m.get(r, col) {
                    m.xor_row_into(rank, r);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Gauss–Jordan inversion, pivoting on the first nonzero bit.
    pub fn invert(&self) -> Result<BitMatrix> {
        if !self.is_square() {
            return Err(Error::dims("invert", self.shape(), self.shape()));
        }
        let n = self.rows;
        let mut aug = self.hstack(&BitMatrix::identity(n))?;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| aug.get(r, col)) else {
                return Err(Error::Singular { dim: n });
            };
            aug.swap_rows(pivot, col);
            for r in 0..n {
                if r != col && aug.get(r, col) {
                    aug.xor_row_into(col, r);
                }
            }
        }
        Ok(aug.submatrix(0..n, n..2 * n))
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> BitMatrix {
        assert!(rows.end <= self.rows && cols.end <= self.cols, "submatrix out of range");
        let mut out = BitMatrix::zeros(rows.len(), cols.len());
        for (oi, i) in rows.enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                if self.get(i, j) {
                    out.set(oi, oj, true);
                }
            }
        }
        out
    }

    /// `[self rhs]`
    pub fn hstack(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::dims("hstack", self.shape(), rhs.shape()));
        }
        let mut out = BitMatrix::zeros(self.rows, self.cols + rhs.cols);
        out.paste(self, 0, 0);
        out.paste(rhs, 0, self.cols);
        Ok(out)
    }

    /// `[self; rhs]`
    pub fn vstack(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.cols {
            return Err(Error::dims("vstack", self.shape(), rhs.shape()));
        }
        let mut out = BitMatrix::zeros(self.rows + rhs.rows, self.cols);
        out.paste(self, 0, 0);
        out.paste(rhs, self.rows, 0);
        Ok(out)
    }

    /// Overwrites the region starting at `(row, col)` with `src`.
    pub fn paste(&mut self, src: &BitMatrix, row: usize, col: usize) {
        assert!(row + src.rows <= self.rows && col + src.cols <= self.cols, "paste out of range");
        for i in 0..src.rows {
            for j in 0..src.cols {
                self.set(row + i, col + j, src.get(i, j));
            }
        }
    }

    /// Kronecker product: block `(i, j)` is `self[i][j] * rhs`.
    pub fn kron(&self, rhs: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.paste(rhs, i * rhs.rows, j * rhs.cols);
                }
            }
        }
        out
    }

    /// `E_m^i`: `I_m` with each row cyclically shifted right by `i`.
    pub fn elementary_perm(m: usize, i: usize) -> BitMatrix {
        assert!(m >= 1, "elementary_perm needs m >= 1");
        let mut out = BitMatrix::zeros(m, m);
        for row in 0..m {
            out.set(row, (row + i) % m, true);
        }
        out
    }

    /// Block-diagonal matrix of equally sized blocks.
    pub fn block_diag(blocks: &[BitMatrix]) -> Result<BitMatrix> {
        let Some(first) = blocks.first() else {
            return Ok(BitMatrix::zeros(0, 0));
        };
        let (br, bc) = first.shape();
        if let Some(bad) = blocks.iter().find(|b| b.shape() != (br, bc)) {
            return Err(Error::dims("block_diag", (br, bc), bad.shape()));
        }
        let mut out = BitMatrix::zeros(br * blocks.len(), bc * blocks.len());
        for (k, b) in blocks.iter().enumerate() {
            out.paste(b, k * br, k * bc);
        }
        Ok(out)
    }

    /// Permutation `Π_T` with `vec(Yᵀ) = Π_T vec(Y)` for a `rows × cols`
    /// matrix `Y` under column-wise vectorization.
    pub fn transpose_perm(rows: usize, cols: usize) -> BitMatrix {
        let n = rows * cols;
        let mut out = BitMatrix::zeros(n, n);
        for i in 0..rows {
            for j in 0..cols {
                out.set(i * cols + j, j * rows + i, true);
            }
        }
        out
    }

    /// Returns `Some(targets)` with `targets[src] = dst` (`self[dst][src] = 1`)
    /// when `self` is a permutation matrix.
    pub fn perm_targets(&self) -> Option<Vec<usize>> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut targets = vec![usize::MAX; n];
        for dst in 0..n {
            let mut ones = (0..n).filter(|&s| self.get(dst, s));
            let src = ones.next()?;
            if ones.next().is_some() || targets[src] != usize::MAX {
                return None;
            }
            targets[src] = dst;
        }
        Some(targets)
    }

    /// Permutation matrix from `targets[src] = dst`.
    pub fn from_perm_targets(targets: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(targets.len(), targets.len());
        for (src, &dst) in targets.iter().enumerate() {
            out.set(dst, src, true);
        }
        out
    }

    pub fn is_permutation(&self) -> bool {
        self.perm_targets().is_some()
    }

    /// Vectorizes `self` into a column vector.
    pub fn vec(&self, mapping: VecMapping) -> Result<BitMatrix> {
        if mapping.shape() != self.shape() {
            return Err(Error::dims("vec", mapping.shape(), self.shape()));
        }
        let mut out = BitMatrix::zeros(self.rows * self.cols, 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.set(mapping.index(i, j), 0, true);
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`BitMatrix::vec`].
    pub fn unvec(v: &BitMatrix, mapping: VecMapping) -> Result<BitMatrix> {
        let (rows, cols) = mapping.shape();
        if v.cols != 1 || v.rows != rows * cols {
            return Err(Error::dims("unvec", (rows * cols, 1), v.shape()));
        }
        let mut out = BitMatrix::zeros(rows, cols);
        for k in 0..v.rows {
            if v.get(k, 0) {
                let (i, j) = mapping.position(k);
                out.set(i, j, true);
            }
        }
        Ok(out)
    }

    /// ASCII grid of `0`/`1`, one row per line.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_ascii(text: &str) -> Result<BitMatrix> {
        let rows: Vec<Vec<u8>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        other => Err(Error::Format(format!("unexpected character {other:?} in bit grid"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if rows.iter().any(|r| r.len() != first.len()) {
                return Err(Error::Format("ragged bit grid".into()));
            }
        }
        Ok(BitMatrix::from_rows(&rows))
    }

    /// Packs all bits row-major, MSB first, padded to a whole byte.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let total = self.rows * self.cols;
        let mut out = vec![0u8; total.div_ceil(8)];
        let mut k = 0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out[k / 8] |= 0x80 >> (k % 8);
                }
                k += 1;
            }
        }
        out
    }

    pub fn from_packed_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<BitMatrix> {
        let total = rows * cols;
        if bytes.len() != total.div_ceil(8) {
            return Err(Error::Format(format!(
                "expected {} bytes for a {rows}x{cols} matrix, got {}",
                total.div_ceil(8),
                bytes.len()
            )));
        }
        let mut m = BitMatrix::zeros(rows, cols);
        for k in 0..total {
            if bytes[k / 8] & (0x80 >> (k % 8)) != 0 {
                m.set(k / cols, k % cols, true);
            }
        }
        Ok(m)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        f.write_str(&self.to_ascii())
    }
}

impl Add for &BitMatrix {
    type Output = BitMatrix;

    fn add(self, rhs: &BitMatrix) -> BitMatrix {
        BitMatrix::add(self, rhs).expect("shape mismatch in +")
    }
}

impl Mul for &BitMatrix {
    type Output = BitMatrix;

    fn mul(self, rhs: &BitMatrix) -> BitMatrix {
        BitMatrix::mul(self, rhs).expect("shape mismatch in *")
    }
}
