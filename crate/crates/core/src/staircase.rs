//! Conventional staircase codes: every row of `[B_{i-1}^T B_i]` is a
//! codeword of the component code, and `B_0` is all-zero.

use std::sync::Arc;

use crate::bch::{CodeRole, ComponentCode};
use crate::codec::{staircase_words, DecoderConfig, FrameCodec};
use crate::engine::{decode_window, Addr, Codes, Frame, Layout};
use crate::error::{Error, Result};
use crate::galois::GaloisField;
use crate::gf2::BitMatrix;
use crate::params::Family;

/// `B_i = [M_i | P_i]` with `P_i = [B_{i-1}^T M_i] G_p`.
pub fn sc_encode_block(code: &ComponentCode, prev: &BitMatrix, info: &BitMatrix) -> Result<BitMatrix> {
    let block = prev.rows();
    if !prev.is_square() || 2 * block != code.n() {
        return Err(Error::dims("sc_encode_block", prev.shape(), (code.n() / 2, code.n() / 2)));
    }
    if info.shape() != (block, block - code.r()) {
        return Err(Error::dims("sc_encode_block", info.shape(), (block, block - code.r())));
    }
    let parity = prev.transpose().hstack(info)?.mul(code.parity_matrix())?;
    info.hstack(&parity)
}

/// Decodes a window of consecutive blocks in place. `window[0]` is the block
/// preceding the first decoded pair; it is left untouched when `fixed_first`.
pub fn sc_window_decode(code: &ComponentCode, window: &mut [BitMatrix], fixed_first: bool, iterations: usize) {
    if window.len() < 2 {
        return;
    }
    let block = window[0].rows();
    let mut frame = Frame { mats: window.to_vec() };
    let mut layout = Layout { read_only: usize::from(fixed_first), ..Layout::default() };
    for i in 1..window.len() {
        layout.begin_unit();
        layout.push_group(staircase_words(Some(i - 1), i, block, 0, CodeRole::Row));
    }
    let codes = Codes { row: code, col: code };
    decode_window(&layout, &mut frame, 0..layout.unit_count(), iterations, &codes);
    for (dst, src) in window.iter_mut().zip(frame.mats) {
        *dst = src;
    }
}

/// Staircase code over a frame of `Λ` transmitted blocks `B_1..B_Λ`.
#[derive(Debug, Clone)]
pub struct StaircaseCode {
    code: ComponentCode,
    block: usize,
    blocks: usize,
    config: DecoderConfig,
    layout: Layout,
    info: Vec<Addr>,
}

impl StaircaseCode {
    pub fn new(m: u32, t: usize, s: usize, blocks: usize, config: DecoderConfig) -> Result<Self> {
        crate::params::CodeParams::derive(Family::Sc, m, t, s)?;
        let field = Arc::new(GaloisField::new(m)?);
        Self::with_code(ComponentCode::row(field, t, s)?, blocks, config)
    }

    pub fn with_code(code: ComponentCode, blocks: usize, config: DecoderConfig) -> Result<Self> {
        if code.n() % 2 != 0 || code.k() * 2 <= code.n() {
            return Err(Error::params("staircase needs even n and rate above 1/2"));
        }
        if blocks == 0 {
            return Err(Error::params("frame needs at least one block"));
        }
        let block = code.n() / 2;
        let mut layout = Layout::default();
        let mut info = Vec::new();
        for i in 0..blocks {
            layout.begin_unit();
            let prev = if i == 0 { None } else { Some(i - 1) };
            layout.push_group(staircase_words(prev, i, block, 0, CodeRole::Row));
            for rho in 0..block {
                info.extend((0..block - code.r()).map(|c| Addr::new(i, rho, c)));
            }
        }
        Ok(StaircaseCode { code, block, blocks, config, layout, info })
    }

    pub fn component(&self) -> &ComponentCode {
        &self.code
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// All blocks `B_0..B_Λ` of an encoded frame.
    pub fn stream(&self, frame: &Frame) -> Vec<BitMatrix> {
        let mut v = vec![BitMatrix::zeros(self.block, self.block)];
        v.extend(frame.mats.iter().cloned());
        v
    }
}

impl FrameCodec for StaircaseCode {
    fn family(&self) -> Family {
        Family::Sc
    }

    fn row_code(&self) -> &ComponentCode {
        &self.code
    }

    fn col_code(&self) -> &ComponentCode {
        &self.code
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
        vec![(self.block, self.block); self.blocks]
    }

    fn fill_redundancy(&self, frame: &mut Frame) -> Result<()> {
        let width = self.block - self.code.r();
        let mut prev = BitMatrix::zeros(self.block, self.block);
        for i in 0..self.blocks {
            let info = frame.mats[i].submatrix(0..self.block, 0..width);
            let b = sc_encode_block(&self.code, &prev, &info)?;
            frame.mats[i] = b.clone();
            prev = b;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy() -> StaircaseCode {
        StaircaseCode::new(7, 2, 27, 6, DecoderConfig::default()).unwrap()
    }

    fn random_info(len: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(0..2u8)).collect()
    }

    #[test]
    fn every_row_is_a_codeword() {
        let sc = toy();
        assert_eq!(sc.block(), 50);
        let frame = sc.encode(&random_info(sc.info_len(), 1)).unwrap();
        let blocks = sc.stream(&frame);
        for i in 1..blocks.len() {
            let joint = blocks[i - 1].transpose().hstack(&blocks[i]).unwrap();
            for rho in 0..sc.block() {
                assert!(sc.component().is_codeword(&joint.row_bits(rho)));
            }
        }
        assert_eq!(sc.violations(&frame), 0);
    }

    #[test]
    fn corrects_sparse_errors() {
        let sc = toy();
        let info = random_info(sc.info_len(), 2);
        let clean = sc.encode(&info).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut noisy = clean.clone();
        for m in noisy.mats.iter_mut() {
            for _ in 0..15 {
                m.flip(rng.gen_range(0..50), rng.gen_range(0..50));
            }
        }
        sc.decode(&mut noisy);
        assert_eq!(sc.extract_info(&noisy), info);
    }

    #[test]
    fn window_decode_fixes_pair() {
        let sc = toy();
        let frame = sc.encode(&random_info(sc.info_len(), 4)).unwrap();
        let clean = sc.stream(&frame);
        let mut window: Vec<BitMatrix> = clean[..4].to_vec();
        window[1].flip(3, 7);
        window[2].flip(10, 11);
        window[2].flip(10, 40);
        window[3].flip(0, 0);
        sc_window_decode(sc.component(), &mut window, true, 8);
        assert_eq!(window, clean[..4].to_vec());
    }

    #[test]
    fn encode_block_rejects_bad_shapes() {
        let sc = toy();
        let prev = BitMatrix::zeros(50, 50);
        assert!(sc_encode_block(sc.component(), &prev, &BitMatrix::zeros(50, 49)).is_err());
        assert!(sc_encode_block(sc.component(), &BitMatrix::zeros(49, 49), &BitMatrix::zeros(49, 35)).is_err());
    }
}
