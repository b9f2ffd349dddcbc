pub mod bch;
pub mod cache;
pub mod cli;
pub mod codec;
pub mod engine;
pub mod error;
pub mod ff;
pub mod floor;
pub mod galois;
pub mod gf2;
pub mod params;
pub mod pff;
pub mod sim;
pub mod staircase;
pub mod stream;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, VecMapping};
pub use params::{CodeParams, Family};
