//! Derived code parameters and rates for the three code families.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rate = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Conventional staircase code.
    Sc,
    /// Feed-forward staircase code.
    Ff,
    /// Partial feed-forward staircase code.
    Pff,
}

impl Family {
    pub fn id(self) -> u8 {
        match self {
            Family::Sc => 0,
            Family::Ff => 1,
            Family::Pff => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Family> {
        match id {
            0 => Some(Family::Sc),
            1 => Some(Family::Ff),
            2 => Some(Family::Pff),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Sc => "sc",
            Family::Ff => "ff",
            Family::Pff => "pff",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Family::Sc),
            "ff" => Ok(Family::Ff),
            "pff" => Ok(Family::Pff),
            other => Err(Error::params(format!("unknown family {other:?}"))),
        }
    }
}

/// Parameters derived from `(family, m, t, s)` for primitive BCH components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub family: Family,
    pub m: u32,
    pub t: usize,
    pub s: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    /// Block side `M`.
    pub block: usize,
    #[serde(with = "rate_serde")]
    pub rate: Rate,
}

mod rate_serde {
    use super::Rate;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rate, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rate, D::Error> {
        let text = String::deserialize(d)?;
        let (a, b) = text.split_once('/').ok_or_else(|| serde::de::Error::custom("rate must be a/b"))?;
        let a = a.parse().map_err(serde::de::Error::custom)?;
        let b = b.parse().map_err(serde::de::Error::custom)?;
        Ok(Rate::new(a, b))
    }
}

impl CodeParams {
    pub fn derive(family: Family, m: u32, t: usize, s: usize) -> Result<Self> {
        if !(2..=16).contains(&m) || t == 0 {
            return Err(Error::params(format!("need 2 <= m <= 16 and t >= 1 (m={m}, t={t})")));
        }
        let full = (1usize << m) - 1;
        let r = m as usize * t;
        if s >= full || full - s <= 2 * r {
            return Err(Error::params(format!("s={s} too large for m={m}, t={t}")));
        }
        let n = full - s;
        let k = n - r;
        let (block, rate) = match family {
            Family::Sc => {
                if n % 2 != 0 {
                    return Err(Error::params(format!("staircase needs even n (n={n})")));
                }
                if 2 * k <= n {
                    return Err(Error::params("staircase needs component rate > 1/2"));
                }
                (n / 2, sc_rate(n, k))
            }
            Family::Ff => {
                let block = self_protected_block(k, r)?;
                if 2 * r >= block {
                    return Err(Error::params(format!(
                        "feed-forward code needs 2r < M (r={r}, M={block})"
                    )));
                }
                (block, sc_rate(n, k))
            }
            Family::Pff => {
                let block = self_protected_block(k, r)?;
                if block <= 2 * r {
                    return Err(Error::params(format!(
                        "partial feed-forward code needs M > 2r (r={r}, M={block})"
                    )));
                }
                (block, pff_rate(n, k)?)
            }
        };
        Ok(CodeParams { family, m, t, s, n, k, r, block, rate })
    }

    pub fn rate_f64(&self) -> f64 {
        *self.rate.numer() as f64 / *self.rate.denom() as f64
    }

    /// `(1/R - 1) * 100`.
    pub fn overhead_percent(&self) -> f64 {
        (1.0 / self.rate_f64() - 1.0) * 100.0
    }

    /// Overhead to three significant figures.
    pub fn overhead_display(&self) -> String {
        three_sig(self.overhead_percent())
    }
}

fn three_sig(x: f64) -> String {
    if x >= 100.0 {
        format!("{x:.0}")
    } else if x >= 10.0 {
        format!("{x:.1}")
    } else {
        format!("{x:.2}")
    }
}

/// `M = (k - r) / 2`, requiring `k` and `r` of equal parity.
fn self_protected_block(k: usize, r: usize) -> Result<usize> {
    if k <= r || (k - r) % 2 != 0 {
        return Err(Error::params(format!("k={k} and r={r} must have the same parity with k > r")));
    }
    Ok((k - r) / 2)
}

/// `R = 2 R_c - 1 = (2k - n) / n`.
pub fn sc_rate(n: usize, k: usize) -> Rate {
    Rate::new((2 * k - n) as u64, n as u64)
}

/// Feed-forward rate when `Λ` single blocks are transmitted and the column
/// redundancy rides on odd-indexed blocks.
pub fn ff_rate_finite(lambda: usize, n: usize, k: usize) -> Result<Rate> {
    if lambda == 0 {
        return Err(Error::params("block count must be at least 1"));
    }
    let info = (2 * k - n) as u64;
    let pairs = lambda.div_ceil(2) as u64;
    let lambda = lambda as u64;
    Ok(Rate::new(info * lambda, info * lambda + 4 * pairs * (n - k) as u64))
}

/// `R_PFF = 1 - r / M`, independent of the propagation length.
pub fn pff_rate(n: usize, k: usize) -> Result<Rate> {
    let r = n - k;
    let block = self_protected_block(k, r)?;
    if 4 * k <= 3 * n || block <= r {
        return Err(Error::params("partial feed-forward rate needs component rate > 3/4"));
    }
    Ok(Rate::new((block - r) as u64, block as u64))
}

/// Information bits per block of a PFF period, in transmission order.
pub fn pff_period_info_bits(block: usize, r: usize, propagation: usize) -> Vec<usize> {
    let mut v = vec![block * (block - r); propagation.saturating_sub(1)];
    v.push(block * (block - 2 * r));
    v.push(block * block);
    v
}
