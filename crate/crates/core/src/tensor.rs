//! Dense tensors, quantized tensors and their little-endian file formats.
//!
//! Dense tensor file (`BFPT`):
//!
//! ```text
//! "BFPT" | u16 version = 1 | u8 dtype (0 f32, 1 bf16) | u8 0 | u32 ndim | ndim x u64 | payload
//! ```
//!
//! Quantized container:
//!
//! ```text
//! magic ("HIF4" | "NVF4" | "MXF4") | u16 version = 1 | u16 flags | u32 ndim | ndim x u64
//!   | [f32 pts factor, iff flags bit 0] | packed groups
//! ```
//!
//! Flags: bit 0 per-tensor scale present, bit 1 that scale was a no-op on an
//! all-zero tensor. The final group is zero padded; dims give the true length.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::baseline::{
    pts_prescale, Mxfp4Group, Nvfp4Group, PtsFactor, MXFP4_GROUP_SIZE, MXFP4_PACKED_BYTES,
    NVFP4_GROUP_SIZE, NVFP4_PACKED_BYTES,
};
use crate::block::{Hif4Block, GROUP_SIZE as HIF4_GROUP_SIZE, PACKED_BYTES as HIF4_PACKED_BYTES};
use crate::scalar::Bf16;
use crate::{Error, Result};

const TENSOR_MAGIC: &[u8; 4] = b"BFPT";
const VERSION: u16 = 1;
const FLAG_PTS: u16 = 1;
const FLAG_PTS_DEGENERATE: u16 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DType {
    F32,
    Bf16,
}

impl DType {
    fn code(self) -> u8 {
        match self {
            DType::F32 => 0,
            DType::Bf16 => 1,
        }
    }

    fn size(self) -> usize {
        match self {
            DType::F32 => 4,
            DType::Bf16 => 2,
        }
    }
}

/// Row-major tensor. Values are held as `f32`; a `Bf16` tensor only holds
/// BF16-exact values, which is checked on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorBuffer {
    dims: Vec<usize>,
    dtype: DType,
    data: Vec<f32>,
}

fn element_count(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Usage(format!("dims must be positive, got {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |n, &d| n.checked_mul(d))
        .ok_or_else(|| Error::Usage(format!("dims {dims:?} overflow")))
}

impl TensorBuffer {
    pub fn from_f32(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n = element_count(&dims)?;
        if n != data.len() {
            return Err(Error::Usage(format!(
                "dims {dims:?} need {n} values, got {}",
                data.len()
            )));
        }
        Ok(TensorBuffer {
            dims,
            dtype: DType::F32,
            data,
        })
    }

    pub fn from_bf16(dims: Vec<usize>, data: &[Bf16]) -> Result<Self> {
        let mut t = Self::from_f32(dims, data.iter().map(|b| b.to_f32()).collect())?;
        t.dtype = DType::Bf16;
        Ok(t)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Length of the last axis.
    pub fn row_len(&self) -> usize {
        *self.dims.last().expect("dims are non-empty")
    }

    /// Elementwise map into a new binary32 tensor of the same shape.
    pub fn map(&self, f: impl Fn(f32) -> f32 + Sync) -> TensorBuffer {
        TensorBuffer {
            dims: self.dims.clone(),
            dtype: DType::F32,
            data: self.data.par_iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.dims.len() + self.len() * self.dtype.size());
        out.extend_from_slice(TENSOR_MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.dtype.code());
        out.push(0);
        write_dims(&mut out, &self.dims);
        match self.dtype {
            DType::F32 => {
                for x in &self.data {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            DType::Bf16 => {
                for x in &self.data {
                    out.extend_from_slice(&((x.to_bits() >> 16) as u16).to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != TENSOR_MAGIC {
            return Err(Error::format(0, "bad magic, expected BFPT"));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::format(4, format!("unsupported version {version}")));
        }
        let dtype = match r.u8()? {
            0 => DType::F32,
            1 => DType::Bf16,
            d => return Err(Error::format(6, format!("unknown dtype {d}"))),
        };
        r.u8()?;
        let dims = r.dims()?;
        let n = element_count(&dims).map_err(|e| Error::format(r.pos as u64, e.to_string()))?;
        let payload = r.rest_exact(n * dtype.size())?;
        let data = match dtype {
            DType::F32 => payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
            DType::Bf16 => payload
                .chunks_exact(2)
                .map(|c| f32::from_bits((u16::from_le_bytes([c[0], c[1]]) as u32) << 16))
                .collect(),
        };
        Ok(TensorBuffer { dims, dtype, data })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

fn write_dims(out: &mut Vec<u8>, dims: &[usize]) {
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::format(
                self.bytes.len() as u64,
                format!(
                    "truncated: need {n} bytes at offset {}, file has {}",
                    self.pos,
                    self.bytes.len()
                ),
            )),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn dims(&mut self) -> Result<Vec<usize>> {
        let at = self.pos;
        let ndim = self.u32()? as usize;
        if ndim == 0 || ndim > 64 {
            return Err(Error::format(at as u64, format!("implausible ndim {ndim}")));
        }
        (0..ndim)
            .map(|_| {
                let at = self.pos;
                let d = self.u64()?;
                usize::try_from(d)
                    .ok()
                    .filter(|&d| d > 0)
                    .ok_or_else(|| Error::format(at as u64, format!("bad dimension {d}")))
            })
            .collect()
    }

    /// The remaining bytes, which must be exactly `n` long.
    fn rest_exact(&mut self, n: usize) -> Result<&'a [u8]> {
        let have = self.bytes.len() - self.pos;
        if have != n {
            return Err(Error::format(
                self.pos as u64,
                format!("payload length: expected {n} bytes, found {have}"),
            ));
        }
        self.take(n)
    }
}

// ---------------------------------------------------------------------------
// Quantization pipelines
// ---------------------------------------------------------------------------

/// Element formats with an on-disk container.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Hif4,
    Nvfp4,
    Mxfp4,
}

impl Format {
    pub fn group_size(self) -> usize {
        match self {
            Format::Hif4 => HIF4_GROUP_SIZE,
            Format::Nvfp4 => NVFP4_GROUP_SIZE,
            Format::Mxfp4 => MXFP4_GROUP_SIZE,
        }
    }

    pub fn packed_bytes(self) -> usize {
        match self {
            Format::Hif4 => HIF4_PACKED_BYTES,
            Format::Nvfp4 => NVFP4_PACKED_BYTES,
            Format::Mxfp4 => MXFP4_PACKED_BYTES,
        }
    }

    fn magic(self) -> &'static [u8; 4] {
        match self {
            Format::Hif4 => b"HIF4",
            Format::Nvfp4 => b"NVF4",
            Format::Mxfp4 => b"MXF4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hif4" => Some(Format::Hif4),
            "nvfp4" => Some(Format::Nvfp4),
            "mxfp4" => Some(Format::Mxfp4),
            _ => None,
        }
    }
}

/// A quantize/dequantize route through one format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pipeline {
    Hif4,
    Nvfp4Direct,
    Nvfp4Pts,
    Mxfp4,
}

impl Pipeline {
    pub const ALL: [Pipeline; 4] = [
        Pipeline::Hif4,
        Pipeline::Nvfp4Direct,
        Pipeline::Nvfp4Pts,
        Pipeline::Mxfp4,
    ];

    pub fn format(self) -> Format {
        match self {
            Pipeline::Hif4 => Format::Hif4,
            Pipeline::Nvfp4Direct | Pipeline::Nvfp4Pts => Format::Nvfp4,
            Pipeline::Mxfp4 => Format::Mxfp4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Hif4 => "hif4",
            Pipeline::Nvfp4Direct => "nvfp4",
            Pipeline::Nvfp4Pts => "nvfp4_pts",
            Pipeline::Mxfp4 => "mxfp4",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Hif4(Vec<Hif4Block>),
    Nvfp4(Vec<Nvfp4Group>),
    Mxfp4(Vec<Mxfp4Group>),
}

impl Payload {
    pub fn format(&self) -> Format {
        match self {
            Payload::Hif4(_) => Format::Hif4,
            Payload::Nvfp4(_) => Format::Nvfp4,
            Payload::Mxfp4(_) => Format::Mxfp4,
        }
    }

    pub fn group_count(&self) -> usize {
        match self {
            Payload::Hif4(g) => g.len(),
            Payload::Nvfp4(g) => g.len(),
            Payload::Mxfp4(g) => g.len(),
        }
    }
}

/// Groups of a flat row-major buffer, the last one zero padded.
fn padded_groups(data: &[f32], size: usize) -> impl IndexedParallelIterator<Item = Vec<f32>> + '_ {
    data.par_chunks(size).map(move |c| {
        let mut g = c.to_vec();
        g.resize(size, 0.0);
        g
    })
}

fn encode_groups<G: Send>(
    data: &[f32],
    size: usize,
    encode: impl Fn(&[f32]) -> Result<G> + Sync,
) -> Result<Vec<G>> {
    padded_groups(data, size).map(|g| encode(&g)).collect()
}

/// A tensor in one of the block formats, with its shape and optional
/// per-tensor scale.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedTensor {
    dims: Vec<usize>,
    payload: Payload,
    pts: Option<PtsFactor>,
}

impl QuantizedTensor {
    pub fn new(dims: Vec<usize>, payload: Payload, pts: Option<PtsFactor>) -> Result<Self> {
        let n = element_count(&dims)?;
        let want = n.div_ceil(payload.format().group_size());
        if payload.group_count() != want {
            return Err(Error::Usage(format!(
                "{n} elements need {want} groups, got {}",
                payload.group_count()
            )));
        }
        if pts.is_some() && payload.format() != Format::Nvfp4 {
            return Err(Error::Usage(
                "per-tensor scaling applies to NVFP4 only".into(),
            ));
        }
        if let Some(p) = pts {
            if !(p.factor > 0.0 && p.factor.is_finite()) {
                return Err(Error::Usage(format!(
                    "per-tensor factor must be positive, got {}",
                    p.factor
                )));
            }
        }
        Ok(QuantizedTensor { dims, payload, pts })
    }

    /// Groups run along the flattened row-major order; the tail group is
    /// zero padded. NaN inputs are a domain error for NVFP4/MXFP4 and a NaN
    /// block for HiF4.
    pub fn quantize(t: &TensorBuffer, pipeline: Pipeline) -> Result<Self> {
        let (payload, pts) = match pipeline {
            Pipeline::Hif4 => (
                Payload::Hif4(encode_groups(t.data(), HIF4_GROUP_SIZE, Hif4Block::encode)?),
                None,
            ),
            Pipeline::Nvfp4Direct => (
                Payload::Nvfp4(encode_groups(
                    t.data(),
                    NVFP4_GROUP_SIZE,
                    Nvfp4Group::encode,
                )?),
                None,
            ),
            Pipeline::Nvfp4Pts => {
                let (scaled, pts) = pts_prescale(t);
                (
                    Payload::Nvfp4(encode_groups(
                        scaled.data(),
                        NVFP4_GROUP_SIZE,
                        Nvfp4Group::encode,
                    )?),
                    Some(pts),
                )
            }
            Pipeline::Mxfp4 => (
                Payload::Mxfp4(encode_groups(
                    t.data(),
                    MXFP4_GROUP_SIZE,
                    Mxfp4Group::encode,
                )?),
                None,
            ),
        };
        Self::new(t.dims().to_vec(), payload, pts)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn pts(&self) -> Option<PtsFactor> {
        self.pts
    }

    pub fn format(&self) -> Format {
        self.payload.format()
    }

    /// Decode to a binary32 tensor. Every decoded value is exact in binary32;
    /// with a per-tensor scale, each element takes one binary32 division.
    pub fn dequantize(&self) -> TensorBuffer {
        let n: usize = self.dims.iter().product();
        let mut data: Vec<f32> = match &self.payload {
            Payload::Hif4(g) => g
                .par_iter()
                .flat_map_iter(|b| b.decode())
                .map(|x| x as f32)
                .collect(),
            Payload::Nvfp4(g) => g
                .par_iter()
                .flat_map_iter(|b| b.decode())
                .map(|x| x as f32)
                .collect(),
            Payload::Mxfp4(g) => g
                .par_iter()
                .flat_map_iter(|b| b.decode())
                .map(|x| x as f32)
                .collect(),
        };
        data.truncate(n);
        if let Some(p) = self.pts {
            data.par_iter_mut().for_each(|x| *x /= p.factor);
        }
        TensorBuffer {
            dims: self.dims.clone(),
            dtype: DType::F32,
            data,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let format = self.format();
        let mut out = Vec::new();
        out.extend_from_slice(format.magic());
        out.extend_from_slice(&VERSION.to_le_bytes());
        let flags = match self.pts {
            None => 0,
            Some(p) if p.degenerate => FLAG_PTS | FLAG_PTS_DEGENERATE,
            Some(_) => FLAG_PTS,
        };
        out.extend_from_slice(&flags.to_le_bytes());
        write_dims(&mut out, &self.dims);
        if let Some(p) = self.pts {
            out.extend_from_slice(&p.factor.to_le_bytes());
        }
        match &self.payload {
            Payload::Hif4(g) => g.iter().for_each(|b| out.extend_from_slice(&b.pack())),
            Payload::Nvfp4(g) => g.iter().for_each(|b| out.extend_from_slice(&b.pack())),
            Payload::Mxfp4(g) => g.iter().for_each(|b| out.extend_from_slice(&b.pack())),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let magic = r.take(4)?;
        let format = [Format::Hif4, Format::Nvfp4, Format::Mxfp4]
            .into_iter()
            .find(|f| f.magic() == magic)
            .ok_or_else(|| Error::format(0, format!("unknown container magic {magic:?}")))?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::format(4, format!("unsupported version {version}")));
        }
        let flags = r.u16()?;
        if flags & !(FLAG_PTS | FLAG_PTS_DEGENERATE) != 0 {
            return Err(Error::format(6, format!("unknown flags {flags:#x}")));
        }
        let dims = r.dims()?;
        let n = element_count(&dims).map_err(|e| Error::format(r.pos as u64, e.to_string()))?;
        let pts = if flags & FLAG_PTS != 0 {
            Some(PtsFactor {
                factor: f32::from_le_bytes(r.take(4)?.try_into().unwrap()),
                degenerate: flags & FLAG_PTS_DEGENERATE != 0,
            })
        } else {
            None
        };
        let groups = n.div_ceil(format.group_size());
        let body = r.rest_exact(groups * format.packed_bytes())?;
        let chunks = body.chunks_exact(format.packed_bytes());
        let payload = match format {
            Format::Hif4 => Payload::Hif4(chunks.map(Hif4Block::unpack).collect::<Result<_>>()?),
            Format::Nvfp4 => Payload::Nvfp4(chunks.map(Nvfp4Group::unpack).collect::<Result<_>>()?),
            Format::Mxfp4 => Payload::Mxfp4(chunks.map(Mxfp4Group::unpack).collect::<Result<_>>()?),
        };
        Self::new(dims, payload, pts).map_err(|e| Error::format(0, e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_bytes())
    }
}

/// Quantize then dequantize in memory.
pub fn quantize_dequantize(t: &TensorBuffer, pipeline: Pipeline) -> Result<TensorBuffer> {
    Ok(QuantizedTensor::quantize(t, pipeline)?.dequantize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfpt_header_size() {
        let t = TensorBuffer::from_f32(vec![1], vec![0.0]).unwrap();
        let b = t.to_bytes();
        assert_eq!(b.len(), 4 + 2 + 1 + 1 + 4 + 8 + 4);
        assert_eq!(&b[..4], b"BFPT");
        assert_eq!(&b[b.len() - 4..], &[0, 0, 0, 0]);

        let t = TensorBuffer::from_f32(vec![1, 1], vec![0.0]).unwrap();
        assert_eq!(t.to_bytes().len(), 32);
    }

    #[test]
    fn bfpt_errors() {
        let t = TensorBuffer::from_f32(vec![2, 3], vec![1.0; 6]).unwrap();
        let b = t.to_bytes();

        let err = TensorBuffer::from_bytes(&b[..b.len() - 1]).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("expected 24") && msg.contains("found 23"),
            "{msg}"
        );

        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(
            TensorBuffer::from_bytes(&bad),
            Err(Error::Format { offset: 0, .. })
        ));

        let mut bad = b.clone();
        bad[4] = 9;
        assert!(matches!(
            TensorBuffer::from_bytes(&bad),
            Err(Error::Format { offset: 4, .. })
        ));

        assert!(TensorBuffer::from_bytes(&b[..10]).is_err());
    }

    #[test]
    fn bf16_tensor_round_trip() {
        let vals: Vec<Bf16> = [1.0f32, -2.5, 3.3, 0.0, f32::NAN]
            .iter()
            .map(|&x| Bf16::round_from_f32(x))
            .collect();
        let t = TensorBuffer::from_bf16(vec![5], &vals).unwrap();
        let b = t.to_bytes();
        assert_eq!(b.len(), 20 + 10);
        let back = TensorBuffer::from_bytes(&b).unwrap();
        assert_eq!(back.dtype(), DType::Bf16);
        let bits = |t: &TensorBuffer| t.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&t));
    }

    #[test]
    fn bad_dims() {
        assert!(TensorBuffer::from_f32(vec![], vec![]).is_err());
        assert!(TensorBuffer::from_f32(vec![0, 2], vec![]).is_err());
        assert!(TensorBuffer::from_f32(vec![2, 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn container_group_counts_and_padding() {
        let data: Vec<f32> = (0..100).map(|i| (i as f32 - 50.0) * 0.01).collect();
        let t = TensorBuffer::from_f32(vec![4, 25], data).unwrap();
        for (p, groups) in [
            (Pipeline::Hif4, 2),
            (Pipeline::Nvfp4Direct, 7),
            (Pipeline::Nvfp4Pts, 7),
            (Pipeline::Mxfp4, 4),
        ] {
            let q = QuantizedTensor::quantize(&t, p).unwrap();
            assert_eq!(q.payload().group_count(), groups);
            let bytes = q.to_bytes();
            let back = QuantizedTensor::from_bytes(&bytes).unwrap();
            assert_eq!(back, q);
            assert_eq!(back.to_bytes(), bytes);
            assert_eq!(q.dequantize().len(), 100);
            assert_eq!(q.dequantize().dims(), &[4, 25]);
        }
    }

    #[test]
    fn container_rejects_garbage() {
        let t = TensorBuffer::from_f32(vec![64], vec![1.0; 64]).unwrap();
        let b = QuantizedTensor::quantize(&t, Pipeline::Hif4)
            .unwrap()
            .to_bytes();
        assert!(QuantizedTensor::from_bytes(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[6] = 0x80;
        assert!(QuantizedTensor::from_bytes(&bad).is_err());
        let mut bad = b.clone();
        bad[..4].copy_from_slice(b"ZZZZ");
        assert!(QuantizedTensor::from_bytes(&bad).is_err());
    }

    #[test]
    fn pts_container_header() {
        let mut data = vec![0.0f32; 32];
        data[3] = 13440.0;
        let t = TensorBuffer::from_f32(vec![32], data).unwrap();
        let q = QuantizedTensor::quantize(&t, Pipeline::Nvfp4Pts).unwrap();
        assert_eq!(q.pts().unwrap().factor, 0.2);
        let b = q.to_bytes();
        assert_eq!(u16::from_le_bytes([b[6], b[7]]), FLAG_PTS);
        // magic, version, flags, ndim, one dim
        assert_eq!(&b[20..24], &0.2f32.to_le_bytes());
        assert_eq!(b.len(), 24 + 2 * NVFP4_PACKED_BYTES);
    }

    #[test]
    fn zero_tensor_every_pipeline() {
        let t = TensorBuffer::from_f32(vec![3, 70], vec![0.0; 210]).unwrap();
        for p in Pipeline::ALL {
            let r = quantize_dequantize(&t, p).unwrap();
            assert!(r.data().iter().all(|&x| x == 0.0), "{p:?}");
        }
        let q = QuantizedTensor::quantize(&t, Pipeline::Nvfp4Pts).unwrap();
        assert!(q.pts().unwrap().degenerate);
        assert_eq!(QuantizedTensor::from_bytes(&q.to_bytes()).unwrap(), q);
    }

    #[test]
    fn pts_only_for_nvfp4() {
        let p = Payload::Hif4(vec![Hif4Block::ZERO]);
        let pts = PtsFactor {
            factor: 2.0,
            degenerate: false,
        };
        assert!(QuantizedTensor::new(vec![64], p, Some(pts)).is_err());
    }
}
