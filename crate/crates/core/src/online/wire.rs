//! Binary datagram protocol between the control loop and the trainer.
//!
//! Frame layout, all integers little-endian:
//!
//! ```text
//! magic   u32   0x47504E4E ("GPNN")
//! version u8    1
//! type    u8    1 = SAMPLE_BATCH, 2 = WEIGHTS, 3 = ACK
//! seq     u32   strictly increasing per sender
//! payload       per type, see below
//! crc32   u32   IEEE CRC over header + payload
//! ```
//!
//! SAMPLE_BATCH: `count:u16` then `count` x (6 x f32 angles, f32 target).
//! WEIGHTS: `n_sizes:u8`, `n_sizes` x u16 layer sizes, hidden activation
//! tag u8, output activation tag u8, `sizes[0]` x (f64 min, f64 max) input
//! scaling, then per layer the row-major f64 weight matrix followed by the
//! f64 bias vector. ACK: the acknowledged sequence number as u32.
//!
//! The CRC is checked before anything is parsed, so any corrupted datagram
//! is rejected by the checksum alone. The WEIGHTS payload doubles as the
//! on-disk model format (`.nnw` files hold one whole frame).

use std::path::Path;

use thiserror::Error;

use crate::estimators::net::Activation;
use crate::estimators::FeedforwardNet;

pub const MAGIC: u32 = 0x4750_4E4E;
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 10;
pub const CRC_LEN: usize = 4;

const TYPE_SAMPLE_BATCH: u8 = 1;
const TYPE_WEIGHTS: u8 = 2;
const TYPE_ACK: u8 = 3;

/// Decode failures; receivers drop the datagram and count these.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("datagram truncated: need {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("bad magic {0:#010x}")]
    BadMagic(u32),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unknown message type {0}")]
    UnknownType(u8),
    #[error("crc mismatch: header claims {expected:#010x}, computed {computed:#010x}")]
    CrcMismatch { expected: u32, computed: u32 },
    #[error("malformed payload: {0}")]
    Malformed(String),
}

/// One streamed training sample: six angles and the ground-truth target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireSample {
    pub angles: [f32; 6],
    pub target: f32,
}

/// A decoded datagram.
#[derive(Debug, Clone, PartialEq)]
pub enum WireMessage {
    SampleBatch { seq: u32, samples: Vec<WireSample> },
    Weights { seq: u32, net: FeedforwardNet },
    Ack { seq: u32, acked: u32 },
}

impl WireMessage {
    pub fn seq(&self) -> u32 {
        match self {
            WireMessage::SampleBatch { seq, .. }
            | WireMessage::Weights { seq, .. }
            | WireMessage::Ack { seq, .. } => *seq,
        }
    }

    fn msg_type(&self) -> u8 {
        match self {
            WireMessage::SampleBatch { .. } => TYPE_SAMPLE_BATCH,
            WireMessage::Weights { .. } => TYPE_WEIGHTS,
            WireMessage::Ack { .. } => TYPE_ACK,
        }
    }
}

/// Serializes a message to one datagram, CRC included.
pub fn encode(msg: &WireMessage) -> Vec<u8> {
    let mut buf = Vec::with_capacity(64);
    buf.extend_from_slice(&MAGIC.to_le_bytes());
    buf.push(VERSION);
    buf.push(msg.msg_type());
    buf.extend_from_slice(&msg.seq().to_le_bytes());
    match msg {
        WireMessage::SampleBatch { samples, .. } => {
            assert!(samples.len() <= u16::MAX as usize, "batch too large");
            buf.extend_from_slice(&(samples.len() as u16).to_le_bytes());
            for s in samples {
                for a in &s.angles {
                    buf.extend_from_slice(&a.to_le_bytes());
                }
                buf.extend_from_slice(&s.target.to_le_bytes());
            }
        }
        WireMessage::Weights { net, .. } => encode_net(net, &mut buf),
        WireMessage::Ack { acked, .. } => buf.extend_from_slice(&acked.to_le_bytes()),
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

fn encode_net(net: &FeedforwardNet, buf: &mut Vec<u8>) {
    let sizes = net.layer_sizes();
    assert!(sizes.len() <= u8::MAX as usize, "too many layers");
    buf.push(sizes.len() as u8);
    for &s in sizes {
        assert!(s <= u16::MAX as usize, "layer too wide");
        buf.extend_from_slice(&(s as u16).to_le_bytes());
    }
    buf.push(net.hidden_activation.tag());
    buf.push(net.output_activation.tag());
    for &(lo, hi) in net.input_scaling() {
        buf.extend_from_slice(&lo.to_le_bytes());
        buf.extend_from_slice(&hi.to_le_bytes());
    }
    for l in 0..net.weights.len() {
        let (rows, cols) = net.weights[l].shape();
        for r in 0..rows {
            for c in 0..cols {
                buf.extend_from_slice(&net.weights[l][(r, c)].to_le_bytes());
            }
        }
        for r in 0..rows {
            buf.extend_from_slice(&net.biases[l][r].to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.pos + n > self.buf.len() {
            return Err(WireError::Truncated {
                needed: self.pos + n,
                got: self.buf.len(),
            });
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, WireError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, WireError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn finished(&self) -> bool {
        self.pos == self.buf.len()
    }
}

/// Parses and validates one datagram. The CRC is verified first over the
/// whole header + payload, then the header fields, then the payload.
pub fn decode(bytes: &[u8]) -> Result<WireMessage, WireError> {
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(WireError::Truncated {
            needed: HEADER_LEN + CRC_LEN,
            got: bytes.len(),
        });
    }
    let (body, crc_bytes) = bytes.split_at(bytes.len() - CRC_LEN);
    let expected = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if expected != computed {
        return Err(WireError::CrcMismatch { expected, computed });
    }

    let mut r = Reader { buf: body, pos: 0 };
    let magic = r.u32()?;
    if magic != MAGIC {
        return Err(WireError::BadMagic(magic));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(WireError::BadVersion(version));
    }
    let msg_type = r.u8()?;
    let seq = r.u32()?;

    let msg = match msg_type {
        TYPE_SAMPLE_BATCH => {
            let count = r.u16()? as usize;
            let mut samples = Vec::with_capacity(count);
            for _ in 0..count {
                let mut angles = [0.0f32; 6];
                for a in &mut angles {
                    *a = r.f32()?;
                }
                let target = r.f32()?;
                samples.push(WireSample { angles, target });
            }
            WireMessage::SampleBatch { seq, samples }
        }
        TYPE_WEIGHTS => WireMessage::Weights {
            seq,
            net: decode_net(&mut r)?,
        },
        TYPE_ACK => WireMessage::Ack {
            seq,
            acked: r.u32()?,
        },
        other => return Err(WireError::UnknownType(other)),
    };
    if !r.finished() {
        return Err(WireError::Malformed(format!(
            "{} trailing payload bytes",
            body.len() - r.pos
        )));
    }
    Ok(msg)
}

fn decode_net(r: &mut Reader) -> Result<FeedforwardNet, WireError> {
    let n_sizes = r.u8()? as usize;
    if n_sizes < 2 {
        return Err(WireError::Malformed(format!("{n_sizes} layer sizes")));
    }
    let mut sizes = Vec::with_capacity(n_sizes);
    for _ in 0..n_sizes {
        let s = r.u16()? as usize;
        if s == 0 {
            return Err(WireError::Malformed("zero-width layer".into()));
        }
        sizes.push(s);
    }
    let hidden = Activation::from_tag(r.u8()?)
        .ok_or_else(|| WireError::Malformed("unknown hidden activation tag".into()))?;
    if hidden != Activation::Tanh {
        return Err(WireError::Malformed("hidden activation must be tanh".into()));
    }
    let output = Activation::from_tag(r.u8()?)
        .ok_or_else(|| WireError::Malformed("unknown output activation tag".into()))?;
    let mut scaling = Vec::with_capacity(sizes[0]);
    for _ in 0..sizes[0] {
        scaling.push((r.f64()?, r.f64()?));
    }
    let mut net = FeedforwardNet::zeros(sizes, output, scaling)
        .map_err(|e| WireError::Malformed(e.to_string()))?;
    for l in 0..net.weights.len() {
        let (rows, cols) = net.weights[l].shape();
        for row in 0..rows {
            for c in 0..cols {
                net.weights[l][(row, c)] = r.f64()?;
            }
        }
        for row in 0..rows {
            net.biases[l][row] = r.f64()?;
        }
    }
    Ok(net)
}

/// Saves a network as a `.nnw` file: one WEIGHTS frame, sequence 0.
pub fn save_net(net: &FeedforwardNet, path: &Path) -> crate::Result<()> {
    let frame = encode(&WireMessage::Weights {
        seq: 0,
        net: net.clone(),
    });
    std::fs::write(path, frame)?;
    Ok(())
}

/// Loads a `.nnw` file written by [`save_net`].
pub fn load_net(path: &Path) -> crate::Result<FeedforwardNet> {
    let bytes = std::fs::read(path)?;
    match decode(&bytes)? {
        WireMessage::Weights { net, .. } => Ok(net),
        other => Err(crate::Error::Wire(WireError::Malformed(format!(
            "expected WEIGHTS frame, found type {}",
            other.msg_type()
        )))),
    }
}
