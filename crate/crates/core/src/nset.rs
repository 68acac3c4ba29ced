//! NSET binary set files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "NSET"
//! 4       1     format version (1)
//! 5       8     limit, little-endian u64
//! 13      ⌈limit/8⌉  membership bits for 1..=limit, LSB-first, zero padded
//! ```

use std::fs;
use std::path::Path;

use crate::bitset::SetBitset;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NSET";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 13;

pub fn encode(set: &SetBitset) -> Vec<u8> {
    let limit = set.limit();
    let payload_len = limit.div_ceil(8) as usize;
    let mut out = Vec::with_capacity(HEADER_LEN + payload_len);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&limit.to_le_bytes());
    out.extend(set.words().iter().flat_map(|w| w.to_le_bytes()).take(payload_len));
    out
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset: offset as u64, message: message.into() }
}

pub fn decode(bytes: &[u8]) -> Result<SetBitset> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(parse_err(0, "missing NSET magic"));
    }
    match bytes.get(4) {
        None => return Err(parse_err(4, "header truncated before version")),
        Some(&VERSION) => {}
        Some(&v) => return Err(parse_err(4, format!("unsupported format version {v}"))),
    }
    if bytes.len() < HEADER_LEN {
        return Err(parse_err(bytes.len(), "header truncated inside limit field"));
    }
    let limit = u64::from_le_bytes(bytes[5..HEADER_LEN].try_into().expect("8 bytes"));
    let payload = &bytes[HEADER_LEN..];
    let expected = limit.div_ceil(8);
    if (payload.len() as u64) < expected {
        return Err(parse_err(bytes.len(), "payload shorter than header limit"));
    }
    if payload.len() as u64 > expected {
        return Err(parse_err(HEADER_LEN + expected as usize, "trailing bytes after payload"));
    }
    let rem = limit % 8;
    if rem != 0 {
        let last = payload[payload.len() - 1];
        if last >> rem != 0 {
            return Err(parse_err(bytes.len() - 1, "nonzero padding bits in final byte"));
        }
    }
    let words = payload
        .chunks(8)
        .map(|c| {
            let mut b = [0u8; 8];
            b[..c.len()].copy_from_slice(c);
            u64::from_le_bytes(b)
        })
        .collect();
    Ok(SetBitset::from_words(limit, words))
}

pub fn write_file(path: &Path, set: &SetBitset) -> Result<()> {
    fs::write(path, encode(set))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<SetBitset> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let s = SetBitset::from_members(10, [1, 3, 9]).unwrap();
        let b = encode(&s);
        assert_eq!(&b[..4], b"NSET");
        assert_eq!(b[4], 1);
        assert_eq!(&b[5..13], &10u64.to_le_bytes());
        assert_eq!(&b[13..], &[0b0000_0101, 0b0000_0001]);
    }

    #[test]
    fn single_element_limit() {
        let b = encode(&SetBitset::empty(1));
        assert_eq!(b.len(), 14);
        assert_eq!(b[13], 0);
    }

    #[test]
    fn malformed_inputs() {
        let good = encode(&SetBitset::full(20));
        let err = |b: &[u8]| match decode(b) {
            Err(Error::Parse { offset, message }) => (offset, message),
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(err(b"NSE").0, 0);
        let mut v = good.clone();
        v[4] = 2;
        assert_eq!(err(&v).0, 4);
        assert_eq!(err(&good[..9]).0, 9);
        let (off, msg) = err(&good[..good.len() - 1]);
        assert_eq!(msg, "payload shorter than header limit");
        assert_eq!(off as usize, good.len() - 1);
        let mut v = good.clone();
        v.push(0);
        assert_eq!(err(&v).1, "trailing bytes after payload");
        let mut v = good.clone();
        *v.last_mut().unwrap() |= 0x80;
        assert_eq!(err(&v).1, "nonzero padding bits in final byte");
    }

    proptest! {
        #[test]
        fn round_trip(limit in 1u64..600, seed: u64) {
            let s = SetBitset::from_predicate(limit, |n| crate::sign::splitmix64(seed ^ n) & 1 == 1);
            let b = encode(&s);
            prop_assert_eq!(b.len() as u64, 13 + limit.div_ceil(8));
            let back = decode(&b).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(encode(&back), b);
        }
    }
}
