//! Code specifications, built constructions and the on-disk construction
//! cache.
//!
//! A cache file is one line of JSON (see [`CacheHeader`]) followed by the
//! listed matrices, each packed row-major, MSB first, padded to a byte.
//! Inverses are re-verified against freshly built `A` and `B` on load.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bch::{CodeDescriptor, ColumnGenerator, ComponentCode};
use crate::codec::{DecoderConfig, FrameCodec};
use crate::error::{Error, Result};
use crate::ff::{FfCode, FfConstruction, PermutationSearch, PermutationSource};
use crate::galois::GaloisField;
use crate::gf2::BitMatrix;
use crate::params::{CodeParams, Family};
use crate::pff::{PffCode, PffConstruction, PiSearch};
use crate::staircase::StaircaseCode;

pub const CACHE_FORMAT: &str = "staircase-construction";
pub const CACHE_VERSION: u32 = 1;

/// Everything that determines a construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub family: Family,
    pub m: u32,
    pub t: usize,
    pub s: usize,
    /// Propagation length (PFF only).
    pub l: usize,
    /// Column generator (FF only; PFF always uses the reciprocal).
    pub column: ColumnGenerator,
    /// Permutation search seed and attempt budget (FF and PFF).
    pub seed: u64,
    pub attempts: usize,
}

impl CodeSpec {
    pub fn new(family: Family, m: u32, t: usize, s: usize) -> Self {
        let (seed, attempts) = match family {
            Family::Ff => (PermutationSearch::default().seed, PermutationSearch::default().attempts),
            _ => (PiSearch::default().seed, PiSearch::default().attempts),
        };
        CodeSpec { family, m, t, s, l: 1, column: ColumnGenerator::Reciprocal, seed, attempts }.normalized()
    }

    /// Clears fields the family ignores, so equal constructions hash equally.
    pub fn normalized(self) -> Self {
        match self.family {
            Family::Sc => CodeSpec { l: 0, column: ColumnGenerator::Same, seed: 0, attempts: 0, ..self },
            Family::Ff => CodeSpec { l: 0, ..self },
            Family::Pff => CodeSpec { column: ColumnGenerator::Reciprocal, ..self },
        }
    }

    pub fn params(&self) -> Result<CodeParams> {
        CodeParams::derive(self.family, self.m, self.t, self.s)
    }

    /// Hex SHA-256 of the normalized spec.
    pub fn key(&self) -> String {
        let json = serde_json::to_vec(&self.normalized()).expect("spec serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn cache_file_name(&self) -> String {
        let n = self.normalized();
        let l = if n.family == Family::Pff { format!("-L{}", n.l) } else { String::new() };
        format!("{}-m{}-t{}-s{}{}-{}.cache", n.family.name(), n.m, n.t, n.s, l, &self.key()[..16])
    }

    pub fn cache_path(&self, dir: &Path) -> PathBuf {
        dir.join(self.cache_file_name())
    }

    /// Blocks per frame must suit the family: even for FF, a multiple of
    /// `L + 1` for PFF.
    pub fn check_lambda(&self, lambda: usize) -> Result<()> {
        let ok = match self.family {
            Family::Sc => lambda >= 1,
            Family::Ff => lambda >= 2 && lambda % 2 == 0,
            Family::Pff => lambda >= self.l + 1 && lambda % (self.l + 1) == 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::params(format!("Λ = {lambda} does not fit a {} frame", self.family)))
        }
    }
}

#[derive(Debug, Clone)]
pub enum Construction {
    Sc(Arc<ComponentCode>),
    Ff(Arc<FfConstruction>),
    Pff(Arc<PffConstruction>),
}

impl Construction {
    pub fn build(spec: &CodeSpec) -> Result<Self> {
        let spec = spec.normalized();
        spec.params()?;
        Ok(match spec.family {
            Family::Sc => {
                let field = Arc::new(GaloisField::new(spec.m)?);
                Construction::Sc(Arc::new(ComponentCode::row(field, spec.t, spec.s)?))
            }
            Family::Ff => {
                let search = PermutationSearch { seed: spec.seed, attempts: spec.attempts };
                Construction::Ff(Arc::new(FfConstruction::build(spec.m, spec.t, spec.s, spec.column, search)?))
            }
            Family::Pff => {
                let search = PiSearch { seed: spec.seed, attempts: spec.attempts };
                Construction::Pff(Arc::new(PffConstruction::build(spec.m, spec.t, spec.s, spec.l, search)?))
            }
        })
    }

    pub fn family(&self) -> Family {
        match self {
            Construction::Sc(_) => Family::Sc,
            Construction::Ff(_) => Family::Ff,
            Construction::Pff(_) => Family::Pff,
        }
    }

    /// A codec for frames of `lambda` blocks.
    pub fn codec(&self, lambda: usize, config: DecoderConfig) -> Result<Box<dyn FrameCodec>> {
        Ok(match self {
            Construction::Sc(code) => Box::new(StaircaseCode::with_code((**code).clone(), lambda, config)?),
            Construction::Ff(c) => {
                if lambda % 2 != 0 {
                    return Err(Error::params("feed-forward frames need an even Λ"));
                }
                Box::new(FfCode::new(c.clone(), lambda / 2, config)?)
            }
            Construction::Pff(c) => {
                let per = c.propagation() + 1;
                if lambda % per != 0 {
                    return Err(Error::params(format!("partial feed-forward frames need Λ a multiple of L+1 = {per}")));
                }
                Box::new(PffCode::new(c.clone(), lambda / per, config)?)
            }
        })
    }

    fn descriptors(&self) -> (CodeDescriptor, CodeDescriptor) {
        match self {
            Construction::Sc(c) => (c.descriptor(), c.descriptor()),
            Construction::Ff(c) => (c.row_code().descriptor(), c.col_code().descriptor()),
            Construction::Pff(c) => (c.row_code().descriptor(), c.col_code().descriptor()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub version: u32,
    pub key: String,
    pub spec: CodeSpec,
    pub row_code: CodeDescriptor,
    pub col_code: CodeDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<(Vec<usize>, Vec<usize>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_source: Option<PermutationSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_attempt: Option<usize>,
    pub matrices: Vec<MatrixEntry>,
}

fn entry(name: &str, m: &BitMatrix) -> MatrixEntry {
    MatrixEntry { name: name.into(), rows: m.rows(), cols: m.cols() }
}

/// Serializes a construction built from `spec`.
pub fn to_cache_bytes(spec: &CodeSpec, cons: &Construction) -> Result<Vec<u8>> {
    let spec = spec.normalized();
    if spec.family != cons.family() {
        return Err(Error::params("spec and construction families differ"));
    }
    let (row_code, col_code) = cons.descriptors();
    let mut header = CacheHeader {
        format: CACHE_FORMAT.into(),
        version: CACHE_VERSION,
        key: spec.key(),
        spec,
        row_code,
        col_code,
        exponents: None,
        permutation_source: None,
        pi: None,
        pi_attempt: None,
        matrices: Vec::new(),
    };
    let mut mats: Vec<&BitMatrix> = Vec::new();
    match cons {
        Construction::Sc(_) => {}
        Construction::Ff(c) => {
            let (e1, e2) = c.exponents();
            header.exponents = Some((e1.to_vec(), e2.to_vec()));
            header.permutation_source = Some(c.source());
            header.matrices.push(entry("a_inv", c.a_inverse()));
            mats.push(c.a_inverse());
        }
        Construction::Pff(c) => {
            header.pi = Some(c.pi_targets().to_vec());
            header.pi_attempt = Some(c.search_origin().0);
            header.matrices.push(entry("a_inv", c.a_inverse()));
            header.matrices.push(entry("b_inv", c.b_inverse()));
            mats.push(c.a_inverse());
            mats.push(c.b_inverse());
        }
    }
    let mut out = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
    out.push(b'\n');
    for m in mats {
        out.extend(m.to_packed_bytes());
    }
    Ok(out)
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

/// Parses a cache file, rebuilds the component codes from its spec and
/// re-verifies every stored inverse.
pub fn from_cache_bytes(bytes: &[u8]) -> Result<(CodeSpec, Construction)> {
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| format_err("cache header line missing"))?;
    let header: CacheHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| format_err(format!("cache header: {e}")))?;
    if header.format != CACHE_FORMAT {
        return Err(format_err(format!("not a construction cache ({:?})", header.format)));
    }
    if header.version != CACHE_VERSION {
        return Err(format_err(format!("cache version {} unsupported (expected {CACHE_VERSION})", header.version)));
    }
    let spec = header.spec.normalized();
    if header.key != spec.key() {
        return Err(format_err("cache key does not match its spec"));
    }
    let mut body = &bytes[nl + 1..];
    let mut mats = Vec::new();
    for e in &header.matrices {
        let len = (e.rows * e.cols).div_ceil(8);
        if body.len() < len {
            return Err(format_err(format!("cache truncated in matrix {}", e.name)));
        }
        mats.push(BitMatrix::from_packed_bytes(e.rows, e.cols, &body[..len])?);
        body = &body[len..];
    }
    if !body.is_empty() {
        return Err(format_err("trailing bytes after cached matrices"));
    }
    let missing = |what: &str| format_err(format!("cache lacks {what}"));
    let cons = match spec.family {
        Family::Sc => {
            let field = Arc::new(GaloisField::new(spec.m)?);
            Construction::Sc(Arc::new(ComponentCode::row(field, spec.t, spec.s)?))
        }
        Family::Ff => {
            let (row, col) = FfConstruction::codes(spec.m, spec.t, spec.s, spec.column)?;
            let (e1, e2) = header.exponents.clone().ok_or_else(|| missing("exponents"))?;
            let source = header.permutation_source.ok_or_else(|| missing("permutation source"))?;
            let a_inv = mats.pop().ok_or_else(|| missing("A inverse"))?;
            let c = FfConstruction::from_inverse(row, col, e1, e2, a_inv, source)?;
            let n = c.a_inverse().rows();
            if c.a_matrix().mul(c.a_inverse())? != BitMatrix::identity(n) {
                return Err(format_err("cached A inverse fails verification"));
            }
            Construction::Ff(Arc::new(c))
        }
        Family::Pff => {
            let (row, col) = PffConstruction::codes(spec.m, spec.t, spec.s)?;
            let pi = header.pi.clone().ok_or_else(|| missing("Π"))?;
            let attempt = header.pi_attempt.ok_or_else(|| missing("Π attempt"))?;
            if mats.len() != 2 {
                return Err(missing("both stage inverses"));
            }
            let b_inv = mats.pop().expect("two matrices");
            let a_inv = mats.pop().expect("two matrices");
            let a = PffConstruction::stage1_matrix(&row, &col)?;
            let b = PffConstruction::stage2_matrix(&row, &col, &pi)?;
            if a.shape() != a_inv.shape() || a.mul(&a_inv)? != BitMatrix::identity(a.rows()) {
                return Err(format_err("cached A inverse fails verification"));
            }
            if b.shape() != b_inv.shape() || b.mul(&b_inv)? != BitMatrix::identity(b.rows()) {
                return Err(format_err("cached B inverse fails verification"));
            }
            Construction::Pff(Arc::new(PffConstruction::assemble(row, col, spec.l, a_inv, pi, b_inv, attempt, spec.seed)?))
        }
    };
    let (row_code, col_code) = cons.descriptors();
    if row_code != header.row_code || col_code != header.col_code {
        return Err(format_err("cached code descriptors differ from the rebuilt codes"));
    }
    Ok((spec, cons))
}

pub fn save(path: &Path, spec: &CodeSpec, cons: &Construction) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, to_cache_bytes(spec, cons)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(CodeSpec, Construction)> {
    from_cache_bytes(&std::fs::read(path)?)
}
