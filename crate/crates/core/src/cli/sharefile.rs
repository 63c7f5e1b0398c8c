//! On-disk share format.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "MBCR"
//!      4     1  version (1)
//!      5     1  field kind (0 = prime, 1 = GF(2^8))
//!      6     2  field modulus, u16 LE (p, or 0x11D)
//!      8     8  n, k, d, r, each u16 LE
//!     16     2  node id, u16 LE
//!     18     4  stripe count, u32 LE
//!     22     8  original file length in bytes, u64 LE
//!     30     -  payload: stripe-major, alpha symbols per stripe, one byte each
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::codec::{CodeParams, CodecError, Share};
use crate::gf::{Field, FieldKind, GfError};

pub const MAGIC: [u8; 4] = *b"MBCR";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 30;

#[derive(Debug, Error)]
pub enum ShareFileError {
    #[error("file is {0} bytes, shorter than the {HEADER_LEN}-byte header")]
    Truncated(usize),
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    Version(u8),
    #[error("unknown field kind code {0}")]
    FieldKind(u8),
    #[error("payload has {got} bytes, header implies {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("payload byte {value} at offset {offset} is not an element of {field}")]
    Symbol {
        offset: usize,
        value: u8,
        field: Field,
    },
    #[error("{field} symbols do not fit in one byte")]
    WideField { field: Field },
    #[error("parameter {name} = {value} does not fit in the header")]
    HeaderRange { name: &'static str, value: u64 },
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Params(#[from] CodecError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn kind_code(kind: FieldKind) -> u8 {
    match kind {
        FieldKind::Prime => 0,
        FieldKind::Binary8 => 1,
    }
}

fn kind_from_code(code: u8) -> Result<FieldKind, ShareFileError> {
    match code {
        0 => Ok(FieldKind::Prime),
        1 => Ok(FieldKind::Binary8),
        other => Err(ShareFileError::FieldKind(other)),
    }
}

fn narrow<T: TryFrom<u64>>(name: &'static str, value: u64) -> Result<T, ShareFileError> {
    T::try_from(value).map_err(|_| ShareFileError::HeaderRange { name, value })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareHeader {
    pub field_kind: FieldKind,
    pub modulus: u16,
    pub n: u16,
    pub k: u16,
    pub d: u16,
    pub r: u16,
    pub node_id: u16,
    pub stripe_count: u32,
    pub original_length: u64,
}

impl ShareHeader {
    pub fn new(
        params: &CodeParams,
        node_id: usize,
        stripe_count: usize,
        original_length: u64,
    ) -> Result<Self, ShareFileError> {
        let field = params.field();
        Ok(Self {
            field_kind: field.kind(),
            modulus: narrow("modulus", field.modulus() as u64)?,
            n: narrow("n", params.n() as u64)?,
            k: narrow("k", params.k() as u64)?,
            d: narrow("d", params.d() as u64)?,
            r: narrow("r", params.r() as u64)?,
            node_id: narrow("node id", node_id as u64)?,
            stripe_count: narrow("stripe count", stripe_count as u64)?,
            original_length,
        })
    }

    pub fn field(&self) -> Result<Field, ShareFileError> {
        Ok(Field::from_parts(self.field_kind, self.modulus as u32)?)
    }

    pub fn params(&self) -> Result<CodeParams, ShareFileError> {
        let p = CodeParams::new(
            self.n as usize,
            self.k as usize,
            self.d as usize,
            self.r as usize,
            self.field()?,
        )?;
        Ok(p)
    }

    /// Every field except the node id.
    pub fn same_code(&self, other: &ShareHeader) -> bool {
        ShareHeader {
            node_id: 0,
            ..*self
        } == ShareHeader {
            node_id: 0,
            ..*other
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5] = kind_code(self.field_kind);
        out[6..8].copy_from_slice(&self.modulus.to_le_bytes());
        for (slot, v) in [self.n, self.k, self.d, self.r, self.node_id]
            .iter()
            .enumerate()
        {
            out[8 + 2 * slot..10 + 2 * slot].copy_from_slice(&v.to_le_bytes());
        }
        out[18..22].copy_from_slice(&self.stripe_count.to_le_bytes());
        out[22..30].copy_from_slice(&self.original_length.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ShareFileError> {
        if bytes.len() < HEADER_LEN {
            return Err(ShareFileError::Truncated(bytes.len()));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(ShareFileError::BadMagic(magic));
        }
        if bytes[4] != VERSION {
            return Err(ShareFileError::Version(bytes[4]));
        }
        let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
        Ok(Self {
            field_kind: kind_from_code(bytes[5])?,
            modulus: u16_at(6),
            n: u16_at(8),
            k: u16_at(10),
            d: u16_at(12),
            r: u16_at(14),
            node_id: u16_at(16),
            stripe_count: u32::from_le_bytes(bytes[18..22].try_into().unwrap()),
            original_length: u64::from_le_bytes(bytes[22..30].try_into().unwrap()),
        })
    }
}

/// One node's shares for every stripe of a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareFile {
    pub header: ShareHeader,
    pub payload: Vec<u8>,
}

impl ShareFile {
    /// Pack per-stripe shares of one node.
    pub fn from_shares(
        params: &CodeParams,
        node_id: usize,
        shares: &[Share],
        original_length: u64,
    ) -> Result<Self, ShareFileError> {
        let field = params.field();
        if field.order() > 256 {
            return Err(ShareFileError::WideField { field });
        }
        let header = ShareHeader::new(params, node_id, shares.len(), original_length)?;
        let payload = shares
            .iter()
            .flat_map(|s| s.evals.iter().map(|&v| v as u8))
            .collect();
        Ok(Self { header, payload })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.header.to_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parse and validate the header, payload length and symbol range.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ShareFileError> {
        let header = ShareHeader::from_bytes(bytes)?;
        let params = header.params()?;
        let payload = bytes[HEADER_LEN..].to_vec();
        let expected = header.stripe_count as usize * params.alpha();
        if payload.len() != expected {
            return Err(ShareFileError::PayloadLength {
                expected,
                got: payload.len(),
            });
        }
        let field = params.field();
        if let Some((offset, &value)) = payload
            .iter()
            .enumerate()
            .find(|(_, &b)| !field.contains(b as u32))
        {
            return Err(ShareFileError::Symbol {
                offset,
                value,
                field,
            });
        }
        Ok(Self { header, payload })
    }

    pub fn node_id(&self) -> usize {
        self.header.node_id as usize
    }

    /// Split the payload back into per-stripe shares.
    pub fn shares(&self) -> Result<Vec<Share>, ShareFileError> {
        let alpha = self.header.params()?.alpha();
        Ok(self
            .payload
            .chunks(alpha)
            .map(|c| Share::new(self.node_id(), c.iter().map(|&b| b as u32).collect()))
            .collect())
    }

    pub fn read(path: &Path) -> Result<Self, ShareFileError> {
        let bytes = fs::read(path).map_err(|source| ShareFileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    /// Write through a temporary file in the same directory, then rename.
    pub fn write_atomic(&self, path: &Path) -> Result<(), ShareFileError> {
        write_atomic(path, &self.to_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ShareFileError> {
    let io = |source| ShareFileError::Io {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Conventional file name for node `id`'s share.
pub fn share_file_name(id: usize) -> String {
    format!("share_{id}.mbcr")
}
