//! Binary model checkpoints.
//!
//! Layout: magic `GNNM`, format version, operator tag, layer count,
//! dims, then per layer the weight shape + row-major payload and the
//! bias payload. All integers and floats little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;
use crate::model::{ModelSpec, Operator};

const MAGIC: &[u8; 4] = b"GNNM";
const VERSION: u32 = 1;

pub fn save_model(path: impl AsRef<Path>, model: &ModelSpec) -> Result<()> {
    let tag: u8 = match model.operator {
        Operator::Gcn => 0,
        Operator::Sage => 1,
        Operator::Custom(_) => {
            return Err(Error::Checkpoint(
                "custom operators hold function pointers and cannot be checkpointed".into(),
            ))
        }
    };
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[tag])?;
    w.write_all(&(model.num_layers() as u32).to_le_bytes())?;
    for &d in &model.dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for l in 0..model.num_layers() {
        let wm = &model.weights[l];
        w.write_all(&(wm.rows() as u32).to_le_bytes())?;
        w.write_all(&(wm.dim() as u32).to_le_bytes())?;
        for v in wm.data() {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(model.biases[l].len() as u32).to_le_bytes())?;
        for v in &model.biases[l] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelSpec> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let operator = match tag[0] {
        0 => Operator::Gcn,
        1 => Operator::Sage,
        t => return Err(Error::Checkpoint(format!("unknown operator tag {t}"))),
    };
    let num_layers = read_u32(&mut r)? as usize;
    let mut dims = Vec::with_capacity(num_layers + 1);
    for _ in 0..=num_layers {
        dims.push(read_u32(&mut r)? as usize);
    }
    let mut weights = Vec::with_capacity(num_layers);
    let mut biases = Vec::with_capacity(num_layers);
    for _ in 0..num_layers {
        let rows = read_u32(&mut r)? as usize;
        let cols = read_u32(&mut r)? as usize;
        let data = read_f32s(&mut r, rows * cols)?;
        weights.push(FeatureMatrix::from_data(rows, cols, data)?);
        let blen = read_u32(&mut r)? as usize;
        biases.push(read_f32s(&mut r, blen)?);
    }
    ModelSpec::new(dims, operator, weights, biases)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f32s(r: &mut impl Read, count: usize) -> Result<Vec<f32>> {
    let mut buf = vec![0u8; count * 4];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
