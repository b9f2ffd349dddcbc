//! Common interface of the three staircase families, used by the simulator,
//! the stream format and the command line.

use serde::{Deserialize, Serialize};

use crate::bch::ComponentCode;
use crate::engine::{sliding_decode, Addr, Codes, Frame, Layout};
use crate::error::{Error, Result};
use crate::params::Family;

/// Order of the two codeword groups of a feed-forward pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    #[default]
    ColumnsFirst,
    RowsFirst,
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "columns-first" | "columns" => Ok(Schedule::ColumnsFirst),
            "rows-first" | "rows" => Ok(Schedule::RowsFirst),
            other => Err(Error::params(format!("unknown schedule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Window length, in decoding units (block pairs).
    pub window: usize,
    /// Maximum passes per window position.
    pub iterations: usize,
    pub schedule: Schedule,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig { window: 7, iterations: 8, schedule: Schedule::ColumnsFirst }
    }
}

/// An encoder/decoder pair for frames of a fixed length.
pub trait FrameCodec: Sync {
    fn family(&self) -> Family;

    fn row_code(&self) -> &ComponentCode;

    fn col_code(&self) -> &ComponentCode;

    fn layout(&self) -> &Layout;

    fn config(&self) -> &DecoderConfig;

    /// Frame positions of the information bits, in payload order.
    fn info_addrs(&self) -> &[Addr];

    /// Shape of every transmitted matrix, in frame order.
    fn frame_shape(&self) -> Vec<(usize, usize)>;

    /// Computes all redundancy of a frame whose information bits are set.
    fn fill_redundancy(&self, frame: &mut Frame) -> Result<()>;

    fn codes(&self) -> Codes<'_> {
        Codes { row: self.row_code(), col: self.col_code() }
    }

    fn info_len(&self) -> usize {
        self.info_addrs().len()
    }

    fn empty_frame(&self) -> Frame {
        Frame {
            mats: self
                .frame_shape()
                .into_iter()
                .map(|(r, c)| crate::gf2::BitMatrix::zeros(r, c))
                .collect(),
        }
    }

    fn encode(&self, info: &[u8]) -> Result<Frame> {
        if info.len() != self.info_len() {
            return Err(Error::dims("encode", (info.len(), 1), (self.info_len(), 1)));
        }
        let mut frame = self.empty_frame();
        for (&a, &b) in self.info_addrs().iter().zip(info) {
            if b & 1 == 1 {
                frame.flip(a);
            }
        }
        self.fill_redundancy(&mut frame)?;
        Ok(frame)
    }

    fn extract_info(&self, frame: &Frame) -> Vec<u8> {
        self.info_addrs().iter().map(|&a| frame.bit(a)).collect()
    }

    fn decode(&self, frame: &mut Frame) {
        let cfg = self.config();
        sliding_decode(self.layout(), frame, cfg.window, cfg.iterations, &self.codes());
    }

    /// Number of component codewords that are currently violated.
    fn violations(&self, frame: &Frame) -> usize {
        self.layout().violations(frame, &self.codes())
    }
}

/// Codewords `[0; prefix | column ρ of prev | row ρ of cur]` for every `ρ`,
/// i.e. the rows of `[B_prev^T B_cur]` for blocks stored in staircase form.
pub(crate) fn staircase_words(
    prev: Option<usize>,
    cur: usize,
    block: usize,
    prefix: usize,
    side: crate::bch::CodeRole,
) -> Vec<crate::engine::Codeword> {
    (0..block)
        .map(|rho| {
            let mut addrs = vec![Addr::ZERO; prefix];
            addrs.extend((0..block).map(|c| match prev {
                Some(p) => Addr::new(p, c, rho),
                None => Addr::ZERO,
            }));
            addrs.extend((0..block).map(|c| Addr::new(cur, rho, c)));
            crate::engine::Codeword { side, addrs }
        })
        .collect()
}
