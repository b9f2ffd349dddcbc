//! Framed binary stream format.
//!
//! ```text
//! offset  size  field
//!      0     1  magic 'S' (0x53)
//!      1     1  format version (1)
//!      2     1  family id (0 SC, 1 FF, 2 PFF)
//!      3     1  m
//!      4     1  t
//!      5     1  L (0 for SC and FF)
//!      6     2  s, little endian
//!      8     4  Λ, blocks per frame, little endian
//!     12     4  payload length in bytes, little endian
//!     16     …  frames
//! ```
//!
//! A frame is its transmitted matrices in frame order, each packed row-major,
//! MSB first, and padded to a whole byte. The payload fills the information
//! bits of consecutive frames (bytes MSB first); the last frame is padded
//! with zero bits. The number of frames follows from the payload length.

use crate::codec::FrameCodec;
use crate::engine::Frame;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::params::Family;

pub const MAGIC: u8 = b'S';
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub family: Family,
    pub m: u8,
    pub t: u8,
    pub l: u8,
    pub s: u16,
    pub lambda: u32,
    pub payload_len: u32,
}

impl StreamHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0] = MAGIC;
        h[1] = VERSION;
        h[2] = self.family.id();
        h[3] = self.m;
        h[4] = self.t;
        h[5] = self.l;
        h[6..8].copy_from_slice(&self.s.to_le_bytes());
        h[8..12].copy_from_slice(&self.lambda.to_le_bytes());
        h[12..16].copy_from_slice(&self.payload_len.to_le_bytes());
        h
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("stream shorter than its {HEADER_LEN}-byte header")));
        }
        if bytes[0] != MAGIC {
            return Err(Error::Format(format!("bad magic byte 0x{:02x}", bytes[0])));
        }
        if bytes[1] != VERSION {
            return Err(Error::Format(format!("unsupported stream version {} (expected {VERSION})", bytes[1])));
        }
        let family = Family::from_id(bytes[2]).ok_or_else(|| Error::Format(format!("unknown family id {}", bytes[2])))?;
        Ok(StreamHeader {
            family,
            m: bytes[3],
            t: bytes[4],
            l: bytes[5],
            s: u16::from_le_bytes([bytes[6], bytes[7]]),
            lambda: u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")),
            payload_len: u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")),
        })
    }
}

fn frame_bytes(shape: &[(usize, usize)]) -> usize {
    shape.iter().map(|&(r, c)| (r * c).div_ceil(8)).sum()
}

pub fn frames_needed(codec: &dyn FrameCodec, payload_len: usize) -> usize {
    (payload_len * 8).div_ceil(codec.info_len()).max(1)
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).map(move |k| (b >> (7 - k)) & 1)).collect()
}

pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | ((b & 1) << (7 - k))))
        .collect()
}

pub fn write_frame(frame: &Frame, out: &mut Vec<u8>) {
    for m in &frame.mats {
        out.extend(m.to_packed_bytes());
    }
}

pub fn read_frame(shape: &[(usize, usize)], bytes: &[u8]) -> Result<Frame> {
    let mut mats = Vec::with_capacity(shape.len());
    let mut at = 0;
    for &(r, c) in shape {
        let len = (r * c).div_ceil(8);
        mats.push(BitMatrix::from_packed_bytes(r, c, &bytes[at..at + len])?);
        at += len;
    }
    Ok(Frame { mats })
}

/// Encodes a payload into a complete stream (header included).
pub fn encode_stream(codec: &dyn FrameCodec, header: StreamHeader, payload: &[u8]) -> Result<Vec<u8>> {
    let payload_len = u32::try_from(payload.len()).map_err(|_| Error::params("payload longer than 4 GiB"))?;
    let header = StreamHeader { payload_len, ..header };
    let k = codec.info_len();
    let mut bits = bytes_to_bits(payload);
    let frames = frames_needed(codec, payload.len());
    bits.resize(frames * k, 0);
    let mut out = header.to_bytes().to_vec();
    for chunk in bits.chunks(k) {
        write_frame(&codec.encode(chunk)?, &mut out);
    }
    Ok(out)
}

/// Splits a stream into its header and frames, checking the length.
pub fn read_stream(codec: &dyn FrameCodec, bytes: &[u8]) -> Result<(StreamHeader, Vec<Frame>)> {
    let header = StreamHeader::from_bytes(bytes)?;
    if header.family != codec.family() {
        return Err(Error::Format(format!("stream is {} but the code is {}", header.family, codec.family())));
    }
    let shape = codec.frame_shape();
    let per = frame_bytes(&shape);
    let frames = frames_needed(codec, header.payload_len as usize);
    let body = &bytes[HEADER_LEN..];
    if body.len() != frames * per {
        return Err(Error::Format(format!("stream body has {} bytes, expected {}", body.len(), frames * per)));
    }
    let frames = body.chunks(per).map(|c| read_frame(&shape, c)).collect::<Result<Vec<_>>>()?;
    Ok((header, frames))
}

pub fn write_stream(header: StreamHeader, frames: &[Frame]) -> Vec<u8> {
    let mut out = header.to_bytes().to_vec();
    for f in frames {
        write_frame(f, &mut out);
    }
    out
}

/// Decodes every frame (when `decode` is set) and returns the payload.
pub fn decode_stream(codec: &dyn FrameCodec, bytes: &[u8], decode: bool) -> Result<(StreamHeader, Vec<u8>)> {
    let (header, frames) = read_stream(codec, bytes)?;
    let mut bits = Vec::with_capacity(frames.len() * codec.info_len());
    for mut f in frames {
        if decode {
            codec.decode(&mut f);
        }
        bits.extend(codec.extract_info(&f));
    }
    bits.truncate(header.payload_len as usize * 8);
    Ok((header, bits_to_bytes(&bits)))
}
