//! Convolution-stack descriptor loaded from an `ELCW` weights file.
//!
//! Layout (little-endian): magic `ELCW`, version u32, layer count u32, then per
//! layer `out_ch, in_ch, kh, kw` as u32, `out*in*kh*kw` f32 weights, `out` f32 biases.

use std::path::Path;

use crate::descriptor::{par_rows, DescriptorField};
use crate::error::{Error, Result};
use crate::raster::{reflect_index, RasterImage};

const MAGIC: &[u8; 4] = b"ELCW";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    /// Indexed `[out][in][ky][kx]`.
    pub weights: Vec<f32>,
    pub biases: Vec<f32>,
}

impl ConvLayer {
    fn validate(&self) -> Result<()> {
        if self.kernel_h.is_multiple_of(2) || self.kernel_w.is_multiple_of(2) {
            return Err(Error::config("convolution kernels must have odd size"));
        }
        let n = self.out_channels * self.in_channels * self.kernel_h * self.kernel_w;
        if self.weights.len() != n || self.biases.len() != self.out_channels {
            return Err(Error::config("convolution layer has inconsistent weight count"));
        }
        if self.weights.iter().chain(&self.biases).any(|v| !v.is_finite()) {
            return Err(Error::config("convolution weights contain non-finite values"));
        }
        Ok(())
    }

    /// Apply the layer with reflective borders, then ReLU. `input` is channel-major.
    fn forward(&self, input: &[f32], width: usize, height: usize) -> Vec<f32> {
        let plane = width * height;
        let (rh, rw) = ((self.kernel_h / 2) as isize, (self.kernel_w / 2) as isize);
        let khw = self.kernel_h * self.kernel_w;
        // rows of all output channels, later transposed to channel-major
        let rows = par_rows(height, width * self.out_channels, |y, row| {
            for x in 0..width {
                for o in 0..self.out_channels {
                    let mut acc = self.biases[o];
                    for i in 0..self.in_channels {
                        let wbase = (o * self.in_channels + i) * khw;
                        let src = &input[i * plane..(i + 1) * plane];
                        for ky in 0..self.kernel_h {
                            let yy = reflect_index(y as isize + ky as isize - rh, height);
                            for kx in 0..self.kernel_w {
                                let xx = reflect_index(x as isize + kx as isize - rw, width);
                                acc += self.weights[wbase + ky * self.kernel_w + kx] * src[yy * width + xx];
                            }
                        }
                    }
                    row[x * self.out_channels + o] = acc.max(0.0);
                }
            }
        });
        let mut out = vec![0.0f32; plane * self.out_channels];
        for p in 0..plane {
            for o in 0..self.out_channels {
                out[o * plane + p] = rows[p * self.out_channels + o];
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvStack {
    pub layers: Vec<ConvLayer>,
}

impl ConvStack {
    pub fn new(layers: Vec<ConvLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("weights file has no layers"));
        }
        let mut prev = 3;
        for (k, l) in layers.iter().enumerate() {
            l.validate()?;
            if l.in_channels != prev {
                return Err(Error::config(format!(
                    "layer {k} expects {} input channels, previous layer gives {prev}",
                    l.in_channels
                )));
            }
            prev = l.out_channels;
        }
        Ok(ConvStack { layers })
    }

    pub fn dim(&self) -> usize {
        self.layers.iter().map(|l| l.out_channels).sum()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)
            .map_err(|e| Error::config(format!("cannot read weights file {}: {e}", path.display())))?;
        Self::parse(&bytes)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::config("weights file has wrong magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::config(format!("unsupported weights version {version}")));
        }
        let count = r.u32()? as usize;
        let mut layers = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let out_channels = r.u32()? as usize;
            let in_channels = r.u32()? as usize;
            let kernel_h = r.u32()? as usize;
            let kernel_w = r.u32()? as usize;
            let n = out_channels
                .checked_mul(in_channels)
                .and_then(|v| v.checked_mul(kernel_h))
                .and_then(|v| v.checked_mul(kernel_w))
                .ok_or_else(|| Error::config("weights file layer too large"))?;
            let weights = r.f32s(n)?;
            let biases = r.f32s(out_channels)?;
            layers.push(ConvLayer {
                out_channels,
                in_channels,
                kernel_h,
                kernel_w,
                weights,
                biases,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::config("trailing bytes after last layer"));
        }
        Self::new(layers)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        for l in &self.layers {
            for v in [l.out_channels, l.in_channels, l.kernel_h, l.kernel_w] {
                out.extend_from_slice(&(v as u32).to_le_bytes());
            }
            for v in l.weights.iter().chain(&l.biases) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Descriptors at full input resolution: concatenated activations of every layer.
    pub fn descriptors(&self, image: &RasterImage) -> Result<DescriptorField> {
        let (w, h) = image.dimensions();
        let plane = w * h;
        let mut input = vec![0.0f32; plane * 3];
        for (p, c) in image.data().chunks_exact(3).enumerate() {
            for ch in 0..3 {
                input[ch * plane + p] = c[ch];
            }
        }
        let dim = self.dim();
        let mut data = vec![0.0f32; plane * dim];
        let mut offset = 0;
        for layer in &self.layers {
            let act = layer.forward(&input, w, h);
            for p in 0..plane {
                for o in 0..layer.out_channels {
                    data[p * dim + offset + o] = act[o * plane + p];
                }
            }
            offset += layer.out_channels;
            input = act;
        }
        DescriptorField::new(w, h, dim, data)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::config("weights file is truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let b = self.take(n.checked_mul(4).ok_or_else(|| Error::config("weights file layer too large"))?)?;
        Ok(b.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{compute_descriptors, DescriptorBackend};

    /// First layer passes the red channel through (center tap 1), second is identity.
    fn passthrough() -> ConvStack {
        let mut w1 = vec![0.0f32; 3 * 9];
        w1[4] = 1.0;
        let mut w2 = vec![0.0f32; 9];
        w2[4] = 1.0;
        ConvStack::new(vec![
            ConvLayer { out_channels: 1, in_channels: 3, kernel_h: 3, kernel_w: 3, weights: w1, biases: vec![0.0] },
            ConvLayer { out_channels: 1, in_channels: 1, kernel_h: 3, kernel_w: 3, weights: w2, biases: vec![0.0] },
        ])
        .unwrap()
    }

    #[test]
    fn passthrough_reproduces_intensity() {
        let img = RasterImage::from_fn(9, 7, |x, y| [(x * 7 + y) as f32 / 70.0, 0.9, 0.1]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.elcw");
        std::fs::write(&path, passthrough().to_bytes()).unwrap();
        let f = compute_descriptors(&img, &DescriptorBackend::ConvWeights { path }).unwrap();
        assert_eq!(f.dim(), 2);
        for y in 0..7 {
            for x in 0..9 {
                let r = img.pixel(x, y)[0];
                assert_eq!(f.at(x, y), &[r, r]);
            }
        }
    }

    #[test]
    fn relu_clips_negative_response() {
        let mut stack = passthrough();
        stack.layers[0].biases[0] = -0.5;
        let img = RasterImage::filled(4, 4, [0.2, 0.0, 0.0]).unwrap();
        let f = stack.descriptors(&img).unwrap();
        assert_eq!(f.at(1, 1), &[0.0, 0.0]);
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let s = passthrough();
        let bytes = s.to_bytes();
        assert_eq!(ConvStack::parse(&bytes).unwrap(), s);
        assert!(matches!(ConvStack::parse(&bytes[..bytes.len() - 2]), Err(Error::Config(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(ConvStack::parse(&bad), Err(Error::Config(_))));
        let missing = DescriptorBackend::ConvWeights { path: "/nonexistent/weights.elcw".into() };
        let img = RasterImage::filled(4, 4, [0.0; 3]).unwrap();
        assert!(matches!(compute_descriptors(&img, &missing), Err(Error::Config(_))));
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let mut layers = passthrough().layers;
        layers[1].in_channels = 2;
        layers[1].weights = vec![0.0; 18];
        assert!(ConvStack::new(layers).is_err());
    }
}
