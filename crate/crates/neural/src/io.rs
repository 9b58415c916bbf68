//! Versioned binary weight files.
//!
//! Layout, all integers little-endian:
//!   magic "DVSLNET\0" | u32 version | f64 output_scale | u32 layer count |
//!   per layer: u32 in_dim, u32 out_dim, u8 activation tag |
//!   payload: per layer, weights row-major f64 then bias f64 |
//!   trailing sha-256 of everything before it.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::mlp::Layer;
use crate::{Activation, Mlp, NeuralError, Result};

const MAGIC: &[u8; 8] = b"DVSLNET\0";
const VERSION: u32 = 1;

impl Mlp {
    /// Serializes the network. Round-trips bit-exactly through `load`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + self.parameter_count() * 8);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.output_scale().to_le_bytes());
        buf.extend_from_slice(&(self.layers().len() as u32).to_le_bytes());
        for layer in self.layers() {
            buf.extend_from_slice(&(layer.in_dim() as u32).to_le_bytes());
            buf.extend_from_slice(&(layer.out_dim() as u32).to_le_bytes());
            buf.push(layer.activation.tag());
        }
        for layer in self.layers() {
            for row in layer.weights.rows() {
                for v in row {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            for v in &layer.bias {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        fs::write(path, buf)?;
        Ok(())
    }

    /// Loads a weight file, verifying magic, version and checksum. Fails
    /// without producing partial state.
    pub fn load(path: &Path) -> Result<Mlp> {
        let data = fs::read(path)?;
        let mut reader = Reader { data: &data, pos: 0 };
        let magic = reader.take(8)?;
        if magic != MAGIC {
            return Err(NeuralError::CorruptFile("bad magic string".into()));
        }
        let version = reader.u32()?;
        if version != VERSION {
            return Err(NeuralError::UnsupportedVersion(version));
        }
        let output_scale = reader.f64()?;
        let layer_count = reader.u32()? as usize;
        if layer_count == 0 || layer_count > 64 {
            return Err(NeuralError::CorruptFile(format!("implausible layer count {layer_count}")));
        }
        let mut shapes = Vec::with_capacity(layer_count);
        for _ in 0..layer_count {
            let in_dim = reader.u32()? as usize;
            let out_dim = reader.u32()? as usize;
            let tag = reader.u8()?;
            let activation = Activation::from_tag(tag)
                .ok_or_else(|| NeuralError::CorruptFile(format!("unknown activation tag {tag}")))?;
            shapes.push((in_dim, out_dim, activation));
        }
        let mut layers = Vec::with_capacity(layer_count);
        for &(in_dim, out_dim, activation) in &shapes {
            let mut weights = Array2::zeros((out_dim, in_dim));
            for r in 0..out_dim {
                for c in 0..in_dim {
                    weights[[r, c]] = reader.f64()?;
                }
            }
            let mut bias = Array1::zeros(out_dim);
            for b in bias.iter_mut() {
                *b = reader.f64()?;
            }
            layers.push(Layer { weights, bias, activation });
        }
        let payload_end = reader.pos;
        let checksum = reader.take(32)?;
        if reader.pos != data.len() {
            return Err(NeuralError::CorruptFile("trailing bytes after checksum".into()));
        }
        let digest = Sha256::digest(&data[..payload_end]);
        if checksum != digest.as_slice() {
            return Err(NeuralError::CorruptFile("checksum mismatch".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(NeuralError::CorruptFile("incompatible adjacent layer dims".into()));
            }
        }
        Ok(Mlp::from_layers(layers, output_scale))
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(NeuralError::CorruptFile("file truncated".into()));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
