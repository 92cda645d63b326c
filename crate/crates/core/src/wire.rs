//! Length-prefixed binary frames exchanged between client and nodes.
//!
//! ```text
//! 0      2        3       4          6                10
//! | 0x50 0x49 | version | type | db_index (BE) | len (BE) | payload ... |
//! ```
//!
//! Query payloads are scheme specific. Answer payloads are field symbols,
//! one byte each when `q <= 256` and two big-endian bytes otherwise. Error
//! payloads are a code byte followed by a UTF-8 message.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};

pub const MAGIC: [u8; 2] = [0x50, 0x49];
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 10;
/// Frames longer than this are rejected before their payload is read.
pub const MAX_PAYLOAD: u32 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameType {
    Query = 0,
    Answer = 1,
    Error = 2,
}

impl TryFrom<u8> for FrameType {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        match b {
            0 => Ok(FrameType::Query),
            1 => Ok(FrameType::Answer),
            2 => Ok(FrameType::Error),
            other => Err(Error::MalformedFrame(format!("unknown frame type {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ErrorCode {
    MalformedFrame = 1,
    InvalidQuery = 2,
    WrongDatabase = 3,
    Internal = 4,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WireFrame {
    pub frame_type: FrameType,
    pub db_index: u16,
    pub payload: Vec<u8>,
}

impl WireFrame {
    pub fn query(db_index: u16, payload: Vec<u8>) -> Self {
        WireFrame { frame_type: FrameType::Query, db_index, payload }
    }

    pub fn answer(db_index: u16, symbols: &[Symbol], field: &Field) -> Self {
        WireFrame { frame_type: FrameType::Answer, db_index, payload: encode_symbols(symbols, field) }
    }

    pub fn error(db_index: u16, code: ErrorCode, message: &str) -> Self {
        let mut payload = vec![code as u8];
        payload.extend_from_slice(message.as_bytes());
        WireFrame { frame_type: FrameType::Error, db_index, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.frame_type as u8);
        out.extend_from_slice(&self.db_index.to_be_bytes());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Decodes exactly one frame occupying all of `bytes`.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::MalformedFrame(format!("{} bytes is shorter than the header", bytes.len())));
        }
        let header: [u8; HEADER_LEN] = bytes[..HEADER_LEN].try_into().expect("header length");
        let (frame_type, db_index, len) = parse_header(&header)?;
        if bytes.len() - HEADER_LEN != len as usize {
            return Err(Error::MalformedFrame(format!(
                "payload length {} does not match header length {len}",
                bytes.len() - HEADER_LEN
            )));
        }
        Ok(WireFrame { frame_type, db_index, payload: bytes[HEADER_LEN..].to_vec() })
    }

    /// Reads one frame. `Ok(None)` on a clean end of stream before a header.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Option<Self>> {
        let mut header = [0u8; HEADER_LEN];
        let mut filled = 0;
        while filled < HEADER_LEN {
            match r.read(&mut header[filled..]) {
                Ok(0) if filled == 0 => return Ok(None),
                Ok(0) => return Err(Error::MalformedFrame("stream ended inside a header".into())),
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        let (frame_type, db_index, len) = parse_header(&header)?;
        let mut payload = vec![0u8; len as usize];
        r.read_exact(&mut payload).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::MalformedFrame("stream ended inside a payload".into()),
            _ => e.into(),
        })?;
        Ok(Some(WireFrame { frame_type, db_index, payload }))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&self.encode())?;
        w.flush()?;
        Ok(())
    }

    /// Splits an error payload into its code byte and message.
    pub fn error_parts(&self) -> Option<(u8, String)> {
        if self.frame_type != FrameType::Error {
            return None;
        }
        let (code, msg) = self.payload.split_first()?;
        Some((*code, String::from_utf8_lossy(msg).into_owned()))
    }
}

fn parse_header(h: &[u8; HEADER_LEN]) -> Result<(FrameType, u16, u32)> {
    if h[..2] != MAGIC {
        return Err(Error::MalformedFrame(format!("bad magic {:02x}{:02x}", h[0], h[1])));
    }
    if h[2] != VERSION {
        return Err(Error::MalformedFrame(format!("unsupported version {}", h[2])));
    }
    let frame_type = FrameType::try_from(h[3])?;
    let db_index = u16::from_be_bytes([h[4], h[5]]);
    let len = u32::from_be_bytes([h[6], h[7], h[8], h[9]]);
    if len > MAX_PAYLOAD {
        return Err(Error::MalformedFrame(format!("payload length {len} exceeds {MAX_PAYLOAD}")));
    }
    Ok((frame_type, db_index, len))
}

pub fn encode_symbols(symbols: &[Symbol], field: &Field) -> Vec<u8> {
    match field.symbol_width() {
        1 => symbols.iter().map(|s| s.value() as u8).collect(),
        _ => symbols.iter().flat_map(|s| s.value().to_be_bytes()).collect(),
    }
}

pub fn decode_symbols(bytes: &[u8], field: &Field) -> Result<Vec<Symbol>> {
    let width = field.symbol_width();
    if !bytes.len().is_multiple_of(width) {
        return Err(Error::MalformedFrame(format!("{} bytes is not a whole number of symbols", bytes.len())));
    }
    bytes
        .chunks(width)
        .map(|c| {
            let v = c.iter().fold(0u32, |acc, &b| acc << 8 | b as u32);
            field.symbol(v).map_err(|_| Error::MalformedFrame(format!("symbol {v} outside GF({})", field.order())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let f = WireFrame::query(0x0102, vec![7, 8, 9]).encode();
        assert_eq!(f, [0x50, 0x49, 1, 0, 1, 2, 0, 0, 0, 3, 7, 8, 9]);
        let e = WireFrame::error(3, ErrorCode::InvalidQuery, "no").encode();
        assert_eq!(&e[..10], &[0x50, 0x49, 1, 2, 0, 3, 0, 0, 0, 3]);
        assert_eq!(WireFrame::decode(&e).unwrap().error_parts(), Some((2, "no".into())));
    }

    #[test]
    fn rejects_malformed() {
        let good = WireFrame::query(1, vec![1, 2]).encode();
        assert!(WireFrame::decode(&good[..good.len() - 1]).is_err());
        assert!(WireFrame::decode(&good[..5]).is_err());
        let mut bad = good.clone();
        bad[0] = 0;
        assert!(WireFrame::decode(&bad).is_err());
        let mut bad = good.clone();
        bad[2] = 2;
        assert!(WireFrame::decode(&bad).is_err());
        let mut bad = good;
        bad[3] = 9;
        assert!(WireFrame::decode(&bad).is_err());
    }

    #[test]
    fn stream_reading() {
        let a = WireFrame::query(0, vec![1]);
        let b = WireFrame::query(1, vec![]);
        let mut bytes = a.encode();
        bytes.extend(b.encode());
        let mut cur = io::Cursor::new(bytes.clone());
        assert_eq!(WireFrame::read_from(&mut cur).unwrap(), Some(a));
        assert_eq!(WireFrame::read_from(&mut cur).unwrap(), Some(b));
        assert_eq!(WireFrame::read_from(&mut cur).unwrap(), None);
        let mut cut = io::Cursor::new(bytes[..4].to_vec());
        assert!(matches!(WireFrame::read_from(&mut cut), Err(Error::MalformedFrame(_))));
        let mut cut = io::Cursor::new(bytes[..10].to_vec());
        assert!(matches!(WireFrame::read_from(&mut cut), Err(Error::MalformedFrame(_))));
    }

    #[test]
    fn wide_symbols() {
        let f = Field::new(257).unwrap();
        let syms = vec![f.symbol(256).unwrap(), f.symbol(3).unwrap()];
        let bytes = encode_symbols(&syms, &f);
        assert_eq!(bytes, [1, 0, 0, 3]);
        assert_eq!(decode_symbols(&bytes, &f).unwrap(), syms);
        assert!(decode_symbols(&[1, 2, 3], &f).is_err());
        assert!(decode_symbols(&[1, 1], &f).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(t in 0u8..3, db in any::<u16>(), payload in proptest::collection::vec(any::<u8>(), 0..64)) {
            let frame = WireFrame { frame_type: FrameType::try_from(t).unwrap(), db_index: db, payload };
            prop_assert_eq!(WireFrame::decode(&frame.encode()).unwrap(), frame);
        }

        #[test]
        fn symbols_round_trip(values in proptest::collection::vec(0u32..256, 0..32)) {
            let f = Field::gf256();
            let syms: Vec<_> = values.iter().map(|&v| f.symbol(v).unwrap()).collect();
            prop_assert_eq!(decode_symbols(&encode_symbols(&syms, &f), &f).unwrap(), syms);
        }
    }
}
