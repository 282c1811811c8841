//! HiF4 block floating-point: a 64-element unit with a three-level scale
//! hierarchy (E6M2 base scale, 8 + 16 one-bit micro-exponents) over S1P2
//! elements, plus the NVFP4 and MXFP4 formats it is measured against.
//!
//! Module map:
//!
//! - [`scalar`]: mini-float codecs (E6M2, S1P2, E2M1, E4M3, E8M0) and BF16 rounding.
//! - [`block`]: the HiF4 unit, its encoder and decoder, and the 36-byte packing.
//! - [`baseline`]: NVFP4 (direct cast and per-tensor scaled) and MXFP4 groups.
//! - [`dot`]: 64-length dot products, reference and fixed-point datapaths.
//! - [`bench`]: Gaussian generator, MSE and the sigma sweep.
//! - [`tensor`]: dense tensors, quantized tensors and their on-disk containers.

pub mod baseline;
pub mod bench;
pub mod block;
pub mod dot;
mod error;
pub mod rng;
pub mod scalar;
pub mod tensor;

pub use baseline::{Mxfp4Group, Nvfp4Group, PtsFactor};
pub use block::Hif4Block;
pub use error::{Error, Result};
pub use scalar::{Bf16, E2M1, E4M3, E6M2, E8M0, S1P2};
pub use tensor::{Pipeline, QuantizedTensor, TensorBuffer};
