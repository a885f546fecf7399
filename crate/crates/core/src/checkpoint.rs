//! Flat-vector binary checkpoints of network parameters.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "FOCAPRM\0"
//! version    u32      currently 1
//! n_layers   u32
//! per layer  u32 in_dim, u32 out_dim, u8 activation (0 relu, 1 sigmoid, 2 identity)
//! n_values   u64      must equal the parameter count implied by the layers
//! values     n_values × f64, in flatten order (per layer: weights row-major, then bias)
//! ```

use std::io::{Read, Write};

use crate::error::{FocaError, Result};
use crate::nn::{Activation, Architecture, LayerSpec, NetworkParams};

pub const MAGIC: &[u8; 8] = b"FOCAPRM\0";
pub const VERSION: u32 = 1;

fn activation_code(a: Activation) -> u8 {
    match a {
        Activation::Relu => 0,
        Activation::Sigmoid => 1,
        Activation::Identity => 2,
    }
}

pub fn write_checkpoint<W: Write>(params: &NetworkParams, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(params.layers.len() as u32).to_le_bytes())?;
    for l in &params.layers {
        out.write_all(&(l.spec.in_dim as u32).to_le_bytes())?;
        out.write_all(&(l.spec.out_dim as u32).to_le_bytes())?;
        out.write_all(&[activation_code(l.spec.activation)])?;
    }
    let flat = params.flatten();
    out.write_all(&(flat.len() as u64).to_le_bytes())?;
    for v in flat {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => FocaError::Format("truncated checkpoint".into()),
        _ => FocaError::Io(e),
    })?;
    Ok(buf)
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<NetworkParams> {
    if &read_array::<8, _>(&mut input)? != MAGIC {
        return Err(FocaError::Format("not a checkpoint (bad magic)".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(FocaError::Format(format!("unsupported checkpoint version {version}")));
    }
    let n_layers = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let mut layers = Vec::with_capacity(n_layers.min(1024));
    for _ in 0..n_layers {
        let in_dim = u32::from_le_bytes(read_array(&mut input)?) as usize;
        let out_dim = u32::from_le_bytes(read_array(&mut input)?) as usize;
        let activation = match read_array::<1, _>(&mut input)?[0] {
            0 => Activation::Relu,
            1 => Activation::Sigmoid,
            2 => Activation::Identity,
            code => return Err(FocaError::Format(format!("unknown activation code {code}"))),
        };
        layers.push(LayerSpec::new(in_dim, out_dim, activation).map_err(|e| FocaError::Format(e.to_string()))?);
    }
    let arch = Architecture::new(layers).map_err(|e| FocaError::Format(e.to_string()))?;
    let n_values = u64::from_le_bytes(read_array(&mut input)?) as usize;
    if n_values != arch.num_params() {
        return Err(FocaError::Format(format!(
            "checkpoint stores {n_values} values but its layers need {}",
            arch.num_params()
        )));
    }
    let mut values = Vec::with_capacity(n_values);
    for _ in 0..n_values {
        values.push(f64::from_le_bytes(read_array(&mut input)?));
    }
    NetworkParams::unflatten(&values, &arch)
}
