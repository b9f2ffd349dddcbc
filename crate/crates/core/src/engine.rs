//! Sliding-window iterative decoding over address-mapped codewords.
//!
//! A frame is a list of transmitted bit matrices. Every component codeword is
//! described by the frame addresses of its `n` positions; structurally zero
//! positions (shortening, the fixed first block) use [`Addr::ZERO`]. Punctured
//! bits are addressed through their transmitted mirror image, so a correction
//! to a punctured bit lands on the transmitted bit it mirrors.

use std::ops::Range;

use crate::bch::{CodeRole, ComponentCode, DecodeOutcome};
use crate::gf2::BitMatrix;

/// Bit address inside a [`Frame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Addr {
    pub mat: u32,
    pub row: u32,
    pub col: u32,
}

impl Addr {
    pub const ZERO: Addr = Addr { mat: u32::MAX, row: 0, col: 0 };

    pub fn new(mat: usize, row: usize, col: usize) -> Self {
        Addr { mat: mat as u32, row: row as u32, col: col as u32 }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.mat == u32::MAX
    }
}

/// Transmitted matrices of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub mats: Vec<BitMatrix>,
}

impl Frame {
    #[inline]
    pub fn bit(&self, a: Addr) -> u8 {
        if a.is_zero() {
            0
        } else {
            self.mats[a.mat as usize].bit(a.row as usize, a.col as usize)
        }
    }

    #[inline]
    pub fn flip(&mut self, a: Addr) {
        debug_assert!(!a.is_zero());
        self.mats[a.mat as usize].flip(a.row as usize, a.col as usize);
    }

    pub fn total_bits(&self) -> usize {
        self.mats.iter().map(|m| m.rows() * m.cols()).sum()
    }

    /// Addresses whose bits differ between two frames of equal shape.
    pub fn diff(&self, other: &Frame) -> Vec<Addr> {
        let mut out = Vec::new();
        for (k, (a, b)) in self.mats.iter().zip(&other.mats).enumerate() {
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    if a.get(i, j) != b.get(i, j) {
                        out.push(Addr::new(k, i, j));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Codeword {
    pub side: CodeRole,
    pub addrs: Vec<Addr>,
}

impl Codeword {
    pub fn gather(&self, frame: &Frame, buf: &mut Vec<u8>) {
        buf.clear();
        buf.extend(self.addrs.iter().map(|&a| frame.bit(a)));
    }
}

/// Codewords grouped into decoding units; each unit is an ordered list of
/// groups decoded in sequence.
#[derive(Debug, Clone, Default)]
pub struct Layout {
    pub codewords: Vec<Codeword>,
    pub units: Vec<Vec<Range<usize>>>,
    /// Frame matrices below this index are read but never corrected.
    pub read_only: usize,
}

impl Layout {
    /// Starts a new unit.
    pub fn begin_unit(&mut self) {
        self.units.push(Vec::new());
    }

    /// Appends a group of codewords to the current unit.
    pub fn push_group(&mut self, words: impl IntoIterator<Item = Codeword>) {
        let start = self.codewords.len();
        self.codewords.extend(words);
        let end = self.codewords.len();
        self.units.last_mut().expect("push_group before begin_unit").push(start..end);
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn unit_codewords(&self, unit: usize) -> impl Iterator<Item = &Codeword> + '_ {
        self.units[unit].iter().flat_map(move |g| self.codewords[g.clone()].iter())
    }

    /// Number of codewords whose current contents are not codewords.
    pub fn violations(&self, frame: &Frame, codes: &Codes<'_>) -> usize {
        let mut buf = Vec::new();
        self.codewords
            .iter()
            .filter(|cw| {
                cw.gather(frame, &mut buf);
                !codes.get(cw.side).is_codeword(&buf)
            })
            .count()
    }
}

/// Row and column component codes used by a layout.
#[derive(Debug, Clone, Copy)]
pub struct Codes<'a> {
    pub row: &'a ComponentCode,
    pub col: &'a ComponentCode,
}

impl<'a> Codes<'a> {
    pub fn get(&self, side: CodeRole) -> &'a ComponentCode {
        match side {
            CodeRole::Row => self.row,
            CodeRole::Column => self.col,
        }
    }
}

/// Decodes one codeword in place. Returns whether any bit changed.
/// Corrections that would touch a structurally zero position, or a matrix
/// below `read_only`, are discarded.
pub fn decode_codeword(cw: &Codeword, frame: &mut Frame, codes: &Codes<'_>, read_only: usize, buf: &mut Vec<u8>) -> bool {
    cw.gather(frame, buf);
    match codes.get(cw.side).decode(buf) {
        DecodeOutcome::Corrected { flips } if !flips.is_empty() => {
            if flips.iter().any(|&j| cw.addrs[j].is_zero() || (cw.addrs[j].mat as usize) < read_only) {
                return false;
            }
            for &j in &flips {
                frame.flip(cw.addrs[j]);
            }
            true
        }
        _ => false,
    }
}

/// Runs up to `iterations` passes over `units`, oldest first. Stops early
/// once a pass changes nothing, which cannot alter the result since decoding
/// is deterministic.
pub fn decode_window(layout: &Layout, frame: &mut Frame, units: Range<usize>, iterations: usize, codes: &Codes<'_>) {
    let mut buf = Vec::new();
    for _ in 0..iterations {
        let mut changed = false;
        for u in units.clone() {
            for group in &layout.units[u] {
                for cw in &layout.codewords[group.clone()] {
                    changed |= decode_codeword(cw, frame, codes, layout.read_only, &mut buf);
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Slides a window of `window` units across the whole layout, one unit at a
/// time. A unit is final once it leaves the window.
pub fn sliding_decode(layout: &Layout, frame: &mut Frame, window: usize, iterations: usize, codes: &Codes<'_>) {
    let window = window.max(1);
    let total = layout.unit_count();
    for lo in 0..total {
        let hi = (lo + window).min(total);
        decode_window(layout, frame, lo..hi, iterations, codes);
    }
}
