//! Binary serialisation of networks and optimiser state.
//!
//! The format is little-endian and self-describing: magic bytes, a format
//! version, then per-layer dimensions followed by raw `f64` bits. Because
//! values are stored as exact bit patterns, a write/read cycle reproduces
//! the network bit for bit.

use std::io::{self, Read, Write};

use ndarray::{Array1, Array2};

use crate::error::NetError;
use crate::nn::adam::{Adam, MomentPair};
use crate::nn::{Activation, DenseNet, Layer};

pub const NET_MAGIC: [u8; 4] = *b"DNET";
pub const NET_VERSION: u16 = 1;
pub const ADAM_MAGIC: [u8; 4] = *b"ADAM";
pub const ADAM_VERSION: u16 = 1;

// -- primitive writers / readers --------------------------------------------

pub(crate) fn write_u16<W: Write>(w: &mut W, v: u16) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub(crate) fn write_u32<W: Write>(w: &mut W, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub(crate) fn write_u64<W: Write>(w: &mut W, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub(crate) fn write_u128<W: Write>(w: &mut W, v: u128) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub(crate) fn write_f64<W: Write>(w: &mut W, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub(crate) fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), NetError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            NetError::Truncated
        } else {
            NetError::Io(e)
        }
    })
}

pub(crate) fn read_u16<R: Read>(r: &mut R) -> Result<u16, NetError> {
    let mut b = [0u8; 2];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u16::from_le_bytes(b))
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32, NetError> {
    let mut b = [0u8; 4];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64, NetError> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_u128<R: Read>(r: &mut R) -> Result<u128, NetError> {
    let mut b = [0u8; 16];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u128::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R) -> Result<f64, NetError> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn read_magic<R: Read>(r: &mut R, expected: [u8; 4]) -> Result<(), NetError> {
    let mut got = [0u8; 4];
    read_exact_or_truncated(r, &mut got)?;
    if got != expected {
        return Err(NetError::BadMagic);
    }
    Ok(())
}

pub(crate) fn write_f64_slice<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    // One buffered write per array keeps checkpointing cheap.
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

pub(crate) fn read_f64_vec<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>, NetError> {
    let mut buf = vec![0u8; n * 8];
    read_exact_or_truncated(r, &mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk is 8 bytes")))
        .collect())
}

// -- networks -----------------------------------------------------------------

pub fn write_net<W: Write>(net: &DenseNet, w: &mut W) -> Result<(), NetError> {
    w.write_all(&NET_MAGIC)?;
    write_u16(w, NET_VERSION)?;
    write_u32(w, net.layers().len() as u32)?;
    for layer in net.layers() {
        write_u32(w, layer.input_dim() as u32)?;
        write_u32(w, layer.output_dim() as u32)?;
        w.write_all(&[layer.activation.tag()])?;
        write_f64_slice(w, layer.weights.as_slice().expect("row-major"))?;
        write_f64_slice(w, layer.bias.as_slice().expect("contiguous"))?;
    }
    Ok(())
}

pub fn read_net<R: Read>(r: &mut R) -> Result<DenseNet, NetError> {
    read_magic(r, NET_MAGIC)?;
    let version = read_u16(r)?;
    if version != NET_VERSION {
        return Err(NetError::BadVersion(version));
    }
    let n_layers = read_u32(r)? as usize;
    if n_layers == 0 {
        return Err(NetError::Truncated);
    }
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let inp = read_u32(r)? as usize;
        let out = read_u32(r)? as usize;
        let mut tag = [0u8; 1];
        read_exact_or_truncated(r, &mut tag)?;
        let activation = Activation::from_tag(tag[0])?;
        let weights = Array2::from_shape_vec((out, inp), read_f64_vec(r, out * inp)?)
            .expect("shape matches read size");
        let bias = Array1::from_vec(read_f64_vec(r, out)?);
        layers.push(Layer {
            weights,
            bias,
            activation,
        });
    }
    DenseNet::from_layers(layers)
}

// -- optimiser state -------------------------------------------------------------

pub fn write_adam<W: Write>(adam: &Adam, w: &mut W) -> Result<(), NetError> {
    w.write_all(&ADAM_MAGIC)?;
    write_u16(w, ADAM_VERSION)?;
    write_f64(w, adam.learning_rate)?;
    write_f64(w, adam.beta1)?;
    write_f64(w, adam.beta2)?;
    write_f64(w, adam.epsilon)?;
    write_u64(w, adam.t)?;
    write_u32(w, adam.moments.len() as u32)?;
    for m in &adam.moments {
        write_u32(w, m.weights_m.ncols() as u32)?;
        write_u32(w, m.weights_m.nrows() as u32)?;
        write_f64_slice(w, m.weights_m.as_slice().expect("row-major"))?;
        write_f64_slice(w, m.weights_v.as_slice().expect("row-major"))?;
        write_f64_slice(w, m.bias_m.as_slice().expect("contiguous"))?;
        write_f64_slice(w, m.bias_v.as_slice().expect("contiguous"))?;
    }
    Ok(())
}

pub fn read_adam<R: Read>(r: &mut R) -> Result<Adam, NetError> {
    read_magic(r, ADAM_MAGIC)?;
    let version = read_u16(r)?;
    if version != ADAM_VERSION {
        return Err(NetError::BadVersion(version));
    }
    let learning_rate = read_f64(r)?;
    let beta1 = read_f64(r)?;
    let beta2 = read_f64(r)?;
    let epsilon = read_f64(r)?;
    let t = read_u64(r)?;
    let n_layers = read_u32(r)? as usize;
    let mut moments = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let inp = read_u32(r)? as usize;
        let out = read_u32(r)? as usize;
        let weights_m = Array2::from_shape_vec((out, inp), read_f64_vec(r, out * inp)?)
            .expect("shape matches read size");
        let weights_v = Array2::from_shape_vec((out, inp), read_f64_vec(r, out * inp)?)
            .expect("shape matches read size");
        let bias_m = Array1::from_vec(read_f64_vec(r, out)?);
        let bias_v = Array1::from_vec(read_f64_vec(r, out)?);
        moments.push(MomentPair {
            weights_m,
            weights_v,
            bias_m,
            bias_v,
        });
    }
    Ok(Adam {
        learning_rate,
        beta1,
        beta2,
        epsilon,
        t,
        moments,
    })
}
