//! STRJ, the binary trajectory container.
//!
//! ```text
//! header (24 bytes, little-endian)
//!   magic         4  b"STRJ"
//!   version       u16  = 1
//!   flags         u16  bit0 labels present, bit1 semantic embeddings present
//!   record_count  u64
//!   hidden_dim    u32  D
//!   semantic_dim  u32  d_s, nonzero iff bit1
//! record (repeated record_count times)
//!   id_len        u16, then id_len bytes of UTF-8
//!   label         u8   0 incorrect, 1 correct, 255 unknown   (bit0 only)
//!   T             u32
//!   states        T * D f32, row-major
//!   semantic      d_s f32                                     (bit1 only)
//! ```
//!
//! The reader treats its input as untrusted: lengths never drive an
//! allocation larger than the bytes actually present.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{Label, Trajectory};

pub const MAGIC: [u8; 4] = *b"STRJ";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:02x?}, expected \"STRJ\"")]
    BadMagic([u8; 4]),
    #[error("unsupported STRJ version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown flag bits {0:#06x}")]
    UnknownFlags(u16),
    #[error("header semantic_dim {semantic_dim} inconsistent with flags bit1 = {flag}")]
    SemanticHeader { flag: bool, semantic_dim: u32 },
    #[error("hidden_dim is 0 but the file holds {0} records")]
    ZeroHiddenDim(u64),
    #[error("truncated header")]
    TruncatedHeader,
    #[error("truncated payload in record {0}")]
    Truncated(u64),
    #[error("record {0}: id is not valid UTF-8")]
    InvalidId(u64),
    #[error("record {record}: id is {len} bytes, the limit is 65535")]
    IdTooLong { record: u64, len: usize },
    #[error("record {record}: invalid label byte {byte}")]
    InvalidLabel { record: u64, byte: u8 },
    #[error("record {record}: T = {rows}, at least 2 states are required")]
    Degenerate { record: u64, rows: u64 },
    #[error("record {0}: non-finite value")]
    NonFinite(u64),
    #[error("record {record}: hidden dim {actual}, file uses {expected}")]
    HiddenDim { record: u64, expected: usize, actual: usize },
    #[error("record {record}: semantic dim {actual}, file uses {expected}")]
    SemanticDim { record: u64, expected: usize, actual: usize },
    #[error("record {0}: semantic embedding required by flags bit1 is missing")]
    MissingSemantic(u64),
    #[error("trailing bytes after the last record")]
    TrailingBytes,
    #[error(transparent)]
    Io(io::Error),
}

/// Header flag bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags(u16);

impl Flags {
    pub const LABELS: Flags = Flags(1);
    pub const SEMANTIC: Flags = Flags(1 << 1);
    const KNOWN: u16 = 0b11;

    pub const fn empty() -> Self {
        Flags(0)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub fn from_bits(bits: u16) -> Option<Self> {
        (bits & !Self::KNOWN == 0).then_some(Flags(bits))
    }

    pub fn contains(self, other: Flags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn labels(self) -> bool {
        self.contains(Self::LABELS)
    }

    pub fn semantic(self) -> bool {
        self.contains(Self::SEMANTIC)
    }
}

impl std::ops::BitOr for Flags {
    type Output = Flags;

    fn bitor(self, rhs: Flags) -> Flags {
        Flags(self.0 | rhs.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u16,
    pub flags: Flags,
    pub record_count: u64,
    pub hidden_dim: u32,
    pub semantic_dim: u32,
}

impl Header {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..6].copy_from_slice(&self.version.to_le_bytes());
        out[6..8].copy_from_slice(&self.flags.bits().to_le_bytes());
        out[8..16].copy_from_slice(&self.record_count.to_le_bytes());
        out[16..20].copy_from_slice(&self.hidden_dim.to_le_bytes());
        out[20..24].copy_from_slice(&self.semantic_dim.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8; HEADER_LEN]) -> Result<Self, FormatError> {
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let raw_flags = u16::from_le_bytes([bytes[6], bytes[7]]);
        let flags = Flags::from_bits(raw_flags).ok_or(FormatError::UnknownFlags(raw_flags))?;
        let record_count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let hidden_dim = u32::from_le_bytes(bytes[16..20].try_into().unwrap());
        let semantic_dim = u32::from_le_bytes(bytes[20..24].try_into().unwrap());
        if flags.semantic() != (semantic_dim > 0) {
            return Err(FormatError::SemanticHeader {
                flag: flags.semantic(),
                semantic_dim,
            });
        }
        if hidden_dim == 0 && record_count > 0 {
            return Err(FormatError::ZeroHiddenDim(record_count));
        }
        Ok(Header {
            version,
            flags,
            record_count,
            hidden_dim,
            semantic_dim,
        })
    }
}

/// Writes `records` as one STRJ stream and returns the number of records.
///
/// All records are validated before the first byte is written. With no
/// records the semantic bit is dropped, since `semantic_dim` would be 0.
pub fn write_trajectories<W: Write>(
    records: &[Trajectory],
    mut sink: W,
    flags: Flags,
) -> Result<u64, FormatError> {
    let hidden_dim = records.first().map_or(0, |r| r.dim());
    let semantic_dim = if flags.semantic() {
        records
            .first()
            .map(|r| r.semantic.as_ref().map_or(0, Vec::len))
            .unwrap_or(0)
    } else {
        0
    };
    let flags = if records.is_empty() {
        Flags(flags.bits() & !Flags::SEMANTIC.bits())
    } else {
        flags
    };

    for (index, record) in records.iter().enumerate() {
        let index = index as u64;
        if record.id.len() > u16::MAX as usize {
            return Err(FormatError::IdTooLong {
                record: index,
                len: record.id.len(),
            });
        }
        if record.dim() != hidden_dim {
            return Err(FormatError::HiddenDim {
                record: index,
                expected: hidden_dim,
                actual: record.dim(),
            });
        }
        if record.len() < 2 {
            return Err(FormatError::Degenerate {
                record: index,
                rows: record.len() as u64,
            });
        }
        if u32::try_from(record.len()).is_err() {
            return Err(FormatError::Io(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("record {index}: too many states"),
            )));
        }
        if flags.semantic() {
            match &record.semantic {
                None => return Err(FormatError::MissingSemantic(index)),
                Some(s) if s.is_empty() => return Err(FormatError::MissingSemantic(index)),
                Some(s) if s.len() != semantic_dim => {
                    return Err(FormatError::SemanticDim {
                        record: index,
                        expected: semantic_dim,
                        actual: s.len(),
                    })
                }
                Some(_) => {}
            }
        }
    }
    let hidden_dim = u32::try_from(hidden_dim).map_err(|_| {
        FormatError::Io(io::Error::new(io::ErrorKind::InvalidInput, "hidden dim exceeds u32"))
    })?;
    let semantic_dim = u32::try_from(semantic_dim).map_err(|_| {
        FormatError::Io(io::Error::new(io::ErrorKind::InvalidInput, "semantic dim exceeds u32"))
    })?;

    let header = Header {
        version: VERSION,
        flags,
        record_count: records.len() as u64,
        hidden_dim,
        semantic_dim,
    };
    sink.write_all(&header.to_bytes()).map_err(FormatError::Io)?;

    let mut buf = Vec::new();
    for record in records {
        buf.clear();
        buf.extend_from_slice(&(record.id.len() as u16).to_le_bytes());
        buf.extend_from_slice(record.id.as_bytes());
        if flags.labels() {
            buf.push(record.label.to_byte());
        }
        buf.extend_from_slice(&(record.len() as u32).to_le_bytes());
        for v in record.states() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        if flags.semantic() {
            for v in record.semantic.as_deref().unwrap_or(&[]) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        sink.write_all(&buf).map_err(FormatError::Io)?;
    }
    sink.flush().map_err(FormatError::Io)?;
    Ok(records.len() as u64)
}

/// Reads a complete STRJ stream.
pub fn read_trajectories<R: Read>(source: R) -> Result<Vec<Trajectory>, FormatError> {
    read_with_header(source).map(|(_, records)| records)
}

/// Reads a complete STRJ stream, returning the parsed header as well.
pub fn read_with_header<R: Read>(mut source: R) -> Result<(Header, Vec<Trajectory>), FormatError> {
    let mut raw = [0u8; HEADER_LEN];
    read_exact_or(&mut source, &mut raw, FormatError::TruncatedHeader)?;
    let header = Header::parse(&raw)?;
    let dim = header.hidden_dim as usize;
    let semantic_dim = header.semantic_dim as usize;

    let mut records = Vec::new();
    for index in 0..header.record_count {
        let truncated = || FormatError::Truncated(index);

        let mut len = [0u8; 2];
        read_exact_or(&mut source, &mut len, truncated())?;
        let id_bytes = read_bytes(&mut source, u16::from_le_bytes(len) as u64, index)?;
        let id = String::from_utf8(id_bytes).map_err(|_| FormatError::InvalidId(index))?;

        let label = if header.flags.labels() {
            let mut byte = [0u8; 1];
            read_exact_or(&mut source, &mut byte, truncated())?;
            Label::from_byte(byte[0]).ok_or(FormatError::InvalidLabel {
                record: index,
                byte: byte[0],
            })?
        } else {
            Label::Unknown
        };

        let mut rows = [0u8; 4];
        read_exact_or(&mut source, &mut rows, truncated())?;
        let rows = u32::from_le_bytes(rows) as u64;
        if rows < 2 {
            return Err(FormatError::Degenerate { record: index, rows });
        }
        let states = read_floats(&mut source, rows * dim as u64, index)?;
        let semantic = if header.flags.semantic() {
            Some(read_floats(&mut source, semantic_dim as u64, index)?)
        } else {
            None
        };

        records.push(Trajectory {
            id,
            label,
            states,
            dim,
            semantic,
        });
    }

    let mut probe = [0u8; 1];
    loop {
        match source.read(&mut probe) {
            Ok(0) => break,
            Ok(_) => return Err(FormatError::TrailingBytes),
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(FormatError::Io(e)),
        }
    }
    Ok((header, records))
}

fn read_exact_or<R: Read>(source: &mut R, buf: &mut [u8], short: FormatError) -> Result<(), FormatError> {
    match source.read_exact(buf) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Err(short),
        Err(e) => Err(FormatError::Io(e)),
    }
}

// Grows the buffer as bytes arrive so a forged length cannot force a huge allocation.
fn read_bytes<R: Read>(source: &mut R, len: u64, record: u64) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::new();
    source
        .take(len)
        .read_to_end(&mut out)
        .map_err(FormatError::Io)?;
    if (out.len() as u64) < len {
        return Err(FormatError::Truncated(record));
    }
    Ok(out)
}

fn read_floats<R: Read>(source: &mut R, count: u64, record: u64) -> Result<Vec<f32>, FormatError> {
    let bytes = count
        .checked_mul(4)
        .ok_or(FormatError::Truncated(record))?;
    let raw = read_bytes(source, bytes, record)?;
    let values: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FormatError::NonFinite(record));
    }
    Ok(values)
}
