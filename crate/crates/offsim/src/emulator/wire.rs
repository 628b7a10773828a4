//! Binary frame format spoken between the socket-mode client and server.
//!
//! Every frame starts with a 16-byte header:
//!
//! ```text
//! offset  size  field
//! 0       4     magic 0x4F 0x46 0x4C 0x44 ("OFLD")
//! 4       1     version, 0x01
//! 5       1     message type: 0x01 TASK, 0x02 RESULT, 0x03 ERROR
//! 6       1     exit index
//! 7       1     split index
//! 8       8     payload length, little-endian unsigned
//! ```
//!
//! followed by exactly `payload length` payload bytes. TASK payloads are
//! synthetic (zero-filled) and sized so the whole frame, header included,
//! equals the profile's uplink volume. RESULT payloads start with a 2-byte
//! little-endian class identifier and are padded to the profile's downlink
//! volume. ERROR payloads carry a UTF-8 message.

use std::io::{self, Read, Write};

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"OFLD";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 16;

/// Upper bound on accepted payloads; anything larger is a violation.
pub const MAX_PAYLOAD: u64 = 1 << 30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown message type {0:#04x}")]
    BadType(u8),
    #[error("payload length {0} exceeds the {MAX_PAYLOAD} byte limit")]
    Oversize(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Task = 0x01,
    Result = 0x02,
    Error = 0x03,
}

impl TryFrom<u8> for MsgType {
    type Error = ProtocolError;

    fn try_from(value: u8) -> Result<Self, ProtocolError> {
        match value {
            0x01 => Ok(MsgType::Task),
            0x02 => Ok(MsgType::Result),
            0x03 => Ok(MsgType::Error),
            other => Err(ProtocolError::BadType(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub msg_type: MsgType,
    pub exit: u8,
    pub split: u8,
    pub payload_len: u64,
}

impl FrameHeader {
    pub fn new(msg_type: MsgType, exit: u8, split: u8, payload_len: u64) -> Self {
        Self {
            msg_type,
            exit,
            split,
            payload_len,
        }
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut buf = [0u8; HEADER_LEN];
        buf[0..4].copy_from_slice(&MAGIC);
        buf[4] = VERSION;
        buf[5] = self.msg_type as u8;
        buf[6] = self.exit;
        buf[7] = self.split;
        buf[8..16].copy_from_slice(&self.payload_len.to_le_bytes());
        buf
    }

    pub fn decode(buf: &[u8; HEADER_LEN]) -> Result<Self, ProtocolError> {
        let magic: [u8; 4] = buf[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(ProtocolError::BadMagic(magic));
        }
        if buf[4] != VERSION {
            return Err(ProtocolError::BadVersion(buf[4]));
        }
        let msg_type = MsgType::try_from(buf[5])?;
        let payload_len = u64::from_le_bytes(buf[8..16].try_into().unwrap());
        if payload_len > MAX_PAYLOAD {
            return Err(ProtocolError::Oversize(payload_len));
        }
        Ok(Self {
            msg_type,
            exit: buf[6],
            split: buf[7],
            payload_len,
        })
    }
}

/// Reads and decodes one header. An `Ok(None)` means the peer closed the
/// stream cleanly before sending anything.
pub fn read_header(reader: &mut impl Read) -> io::Result<Option<Result<FrameHeader, ProtocolError>>> {
    let mut buf = [0u8; HEADER_LEN];
    let mut filled = 0;
    while filled < HEADER_LEN {
        match reader.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => {
                return Err(io::Error::new(
                    io::ErrorKind::UnexpectedEof,
                    "stream ended inside a frame header",
                ))
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(Some(FrameHeader::decode(&buf)))
}

/// Reads and discards exactly `len` payload bytes.
pub fn drain_payload(reader: &mut impl Read, len: u64) -> io::Result<()> {
    io::copy(&mut reader.take(len), &mut io::sink()).and_then(|copied| {
        if copied == len {
            Ok(())
        } else {
            Err(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                "stream ended inside a frame payload",
            ))
        }
    })
}

/// Writes an ERROR frame carrying `message`.
pub fn write_error(writer: &mut impl Write, message: &str) -> io::Result<()> {
    let body = message.as_bytes();
    let header = FrameHeader::new(MsgType::Error, 0, 0, body.len() as u64);
    writer.write_all(&header.encode())?;
    writer.write_all(body)?;
    writer.flush()
}

/// Converts a volume in bits to whole on-wire bytes (nearest).
pub fn volume_bytes(bits: f64) -> u64 {
    (bits / 8.0).round() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = FrameHeader::new(MsgType::Task, 5, 4, 12_559);
        let encoded = h.encode();
        assert_eq!(&encoded[0..4], b"OFLD");
        assert_eq!(encoded[4], 0x01);
        assert_eq!(encoded[5], 0x01);
        assert_eq!(FrameHeader::decode(&encoded).unwrap(), h);
    }

    #[test]
    fn payload_length_is_little_endian() {
        let h = FrameHeader::new(MsgType::Result, 1, 0, 0x0102);
        let encoded = h.encode();
        assert_eq!(encoded[8], 0x02);
        assert_eq!(encoded[9], 0x01);
        assert_eq!(&encoded[10..16], &[0u8; 6]);
    }

    #[test]
    fn rejects_malformed_headers() {
        let good = FrameHeader::new(MsgType::Task, 5, 0, 8).encode();

        let mut bad_magic = good;
        bad_magic[0] = b'X';
        assert!(matches!(
            FrameHeader::decode(&bad_magic),
            Err(ProtocolError::BadMagic(_))
        ));

        let mut bad_version = good;
        bad_version[4] = 0x02;
        assert_eq!(
            FrameHeader::decode(&bad_version),
            Err(ProtocolError::BadVersion(0x02))
        );

        let mut bad_type = good;
        bad_type[5] = 0x7f;
        assert_eq!(
            FrameHeader::decode(&bad_type),
            Err(ProtocolError::BadType(0x7f))
        );

        let mut oversize = good;
        oversize[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(
            FrameHeader::decode(&oversize),
            Err(ProtocolError::Oversize(_))
        ));
    }

    #[test]
    fn read_header_distinguishes_clean_close() {
        let mut empty: &[u8] = &[];
        assert!(read_header(&mut empty).unwrap().is_none());

        let mut truncated: &[u8] = &MAGIC;
        assert!(read_header(&mut truncated).is_err());
    }

    #[test]
    fn volume_conversions() {
        assert_eq!(volume_bytes(1749.8e3), 218_725);
        assert_eq!(volume_bytes(1.6e3), 200);
        assert_eq!(volume_bytes(625.1e3), 78_138); // rounds the half byte up
    }
}
