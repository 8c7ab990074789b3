//! `.wcs` payload files.
//!
//! All fields little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "WCS1"
//!      4     4  width          u32
//!      8     4  height         u32
//!     12     1  wavelet family u8  (0 Beylkin, 1 Coiflet, 2 Daubechies,
//!                                   3 Symmlet, 4 Vaidyanathan)
//!     13     1  tap count      u8
//!     14     1  levels         u8
//!     15     8  rr_coarse      f64
//!     23     8  rr_next        f64
//!     31     8  seed_coarse    u64
//!     39     8  seed_next      u64
//!     47     4  len(y_coarse)  u32
//!     51     4  len(y_next)    u32
//!     55        body: 256 approximation values (row-major), y_coarse,
//!               y_next, all f64
//!    end     4  CRC-32 (IEEE) of the body bytes
//! ```
//!
//! The transform uses the even downsampling phase and periodized borders;
//! sensing matrices are regenerated from the seeds as described in
//! [`crate::sensing`].

use std::io::{Read, Write};

use ndarray::Array2;
use thiserror::Error;

use crate::codec::{CsPayload, APPROX_SIDE};
use crate::wavelet::{Family, WaveletName};

pub const MAGIC: &[u8; 4] = b"WCS1";
pub const HEADER_LEN: usize = 55;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("not a wavecs payload (bad magic)")]
    BadMagic,
    #[error("truncated payload: {0}")]
    Truncated(&'static str),
    #[error("payload checksum mismatch")]
    ChecksumMismatch,
    #[error("invalid payload: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    /// True for errors about the bytes themselves rather than the I/O layer.
    pub fn is_corrupt(&self) -> bool {
        !matches!(self, FormatError::Io(_))
    }
}

pub fn to_bytes(payload: &CsPayload) -> Vec<u8> {
    let body_len = 8 * (payload.approx.len() + payload.y_coarse.len() + payload.y_next.len());
    let mut out = Vec::with_capacity(HEADER_LEN + body_len + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&payload.width.to_le_bytes());
    out.extend_from_slice(&payload.height.to_le_bytes());
    out.push(payload.wavelet.family.id());
    out.push(payload.wavelet.taps);
    out.push(payload.levels);
    out.extend_from_slice(&payload.rr_coarse.to_le_bytes());
    out.extend_from_slice(&payload.rr_next.to_le_bytes());
    out.extend_from_slice(&payload.seed_coarse.to_le_bytes());
    out.extend_from_slice(&payload.seed_next.to_le_bytes());
    out.extend_from_slice(&(payload.y_coarse.len() as u32).to_le_bytes());
    out.extend_from_slice(&(payload.y_next.len() as u32).to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);
    let values = payload
        .approx
        .iter()
        .chain(&payload.y_coarse)
        .chain(&payload.y_next);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out[HEADER_LEN..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn write_payload<W: Write>(mut w: W, payload: &CsPayload) -> Result<(), FormatError> {
    w.write_all(&to_bytes(payload))?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], FormatError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(FormatError::Truncated(what))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], FormatError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, FormatError> {
        Ok(self.array::<1>(what)?[0])
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, FormatError> {
        self.array(what).map(u32::from_le_bytes)
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, FormatError> {
        self.array(what).map(u64::from_le_bytes)
    }

    fn f64(&mut self, what: &'static str) -> Result<f64, FormatError> {
        self.array(what).map(f64::from_le_bytes)
    }

    fn f64s(&mut self, n: usize, what: &'static str) -> Result<Vec<f64>, FormatError> {
        let raw = self.take(n.checked_mul(8).ok_or(FormatError::Truncated(what))?, what)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<CsPayload, FormatError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "magic")? != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let width = c.u32("header")?;
    let height = c.u32("header")?;
    let family_id = c.u8("header")?;
    let taps = c.u8("header")?;
    let levels = c.u8("header")?;
    let rr_coarse = c.f64("header")?;
    let rr_next = c.f64("header")?;
    let seed_coarse = c.u64("header")?;
    let seed_next = c.u64("header")?;
    let len_coarse = c.u32("header")? as usize;
    let len_next = c.u32("header")? as usize;

    let body_start = c.pos;
    let approx = c.f64s(APPROX_SIDE * APPROX_SIDE, "approximation")?;
    let y_coarse = c.f64s(len_coarse, "coarse measurements")?;
    let y_next = c.f64s(len_next, "next measurements")?;
    let body_end = c.pos;
    let crc = c.u32("checksum")?;
    if c.pos != bytes.len() {
        return Err(FormatError::Invalid(format!(
            "{} trailing bytes",
            bytes.len() - c.pos
        )));
    }
    if crc32fast::hash(&bytes[body_start..body_end]) != crc {
        return Err(FormatError::ChecksumMismatch);
    }

    let family = Family::from_id(family_id)
        .ok_or_else(|| FormatError::Invalid(format!("unknown wavelet family id {family_id}")))?;
    let payload = CsPayload {
        width,
        height,
        wavelet: WaveletName::new(family, taps),
        levels,
        rr_coarse,
        rr_next,
        seed_coarse,
        seed_next,
        approx: Array2::from_shape_vec((APPROX_SIDE, APPROX_SIDE), approx).expect("256 values"),
        y_coarse,
        y_next,
    };
    payload
        .validate()
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(payload)
}

pub fn read_payload<R: Read>(mut r: R) -> Result<CsPayload, FormatError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}
