//! Binary artifact formats: embeddings (`.sleb`), graph indexes
//! (`.slmi`) and trained parameters (`.slpr`).
//!
//! Embedding layout, little-endian:
//!
//! ```text
//! magic   b"SLEB"
//! version u32  (currently 1)
//! L       u32
//! P       u64
//! data    f32 * (P * L), column-major (one action contiguous)
//! ```
//!
//! The in-memory matrix is f64; storage is deliberately f32.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use slate_core::mips::{read_graph, write_graph, NswGraph};
use slate_core::types::ParamShape;
use slate_core::{EmbeddingMatrix, PolicyParams};

use crate::{io_err, ForgeError, Result};

const SLEB_MAGIC: &[u8; 4] = b"SLEB";
const SLPR_MAGIC: &[u8; 4] = b"SLPR";
const VERSION: u32 = 1;

pub fn write_embeddings(beta: &EmbeddingMatrix, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(20 + beta.data().len() * 4);
    buf.extend_from_slice(SLEB_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(beta.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(beta.num_actions() as u64).to_le_bytes());
    for &v in beta.data() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, buf).map_err(io_err(path))
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let fail = |msg: &str| ForgeError::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: msg.to_string(),
    };
    if bytes.len() < 20 || &bytes[..4] != SLEB_MAGIC {
        return Err(fail("not an SLEB embedding file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(fail(&format!("unsupported version {version}")));
    }
    let l = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let p = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let expected = 20 + 4 * l * p;
    if bytes.len() != expected {
        return Err(fail(&format!(
            "expected {expected} bytes for L={l} P={p}, found {}",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(l * p);
    for chunk in bytes[20..].chunks_exact(4) {
        data.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
    }
    Ok(EmbeddingMatrix::from_column_major(l, p, data)?)
}

pub fn write_index(graph: &NswGraph, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_graph(graph, &mut buf);
    fs::write(path, buf).map_err(io_err(path))
}

pub fn read_index(path: &Path) -> Result<NswGraph> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(io_err(path))?
        .read_to_end(&mut bytes)
        .map_err(io_err(path))?;
    Ok(read_graph(&bytes)?)
}

pub fn write_params(params: &PolicyParams, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(SLPR_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    let shape_tag: u32 = match params.shape() {
        ParamShape::Linear { .. } => 1,
        ParamShape::TwoLayer { .. } => 2,
    };
    buf.extend_from_slice(&shape_tag.to_le_bytes());
    buf.extend_from_slice(&(params.dim() as u32).to_le_bytes());
    for &v in params.flat() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&buf).map_err(io_err(path))
}

pub fn read_params(path: &Path) -> Result<PolicyParams> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let fail = |msg: &str| ForgeError::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: msg.to_string(),
    };
    if bytes.len() < 16 || &bytes[..4] != SLPR_MAGIC {
        return Err(fail("not an SLPR parameter file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(fail(&format!("unsupported version {version}")));
    }
    let shape_tag = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let dim = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let shape = match shape_tag {
        1 => ParamShape::Linear { dim },
        2 => ParamShape::TwoLayer { dim },
        other => return Err(fail(&format!("unknown shape tag {other}"))),
    };
    let expected = 16 + 8 * shape.param_len();
    if bytes.len() != expected {
        return Err(fail(&format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(PolicyParams::from_flat(shape, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use slate_core::RngStream;

    #[test]
    fn embeddings_round_trip_at_f32_precision() {
        let dir = std::env::temp_dir().join("slate_forge_test_sleb");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("beta.sleb");
        let mut rng = RngStream::new(1);
        let beta = EmbeddingMatrix::gaussian(3, 17, 1.0, &mut rng).unwrap();
        write_embeddings(&beta, &path).unwrap();
        let back = read_embeddings(&path).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.num_actions(), 17);
        for (a, b) in beta.data().iter().zip(back.data()) {
            assert_eq!(*a as f32 as f64, *b);
        }
        // Reading the written file twice is bit-stable.
        write_embeddings(&back, &path).unwrap();
        let again = read_embeddings(&path).unwrap();
        assert_eq!(back.data(), again.data());
    }

    #[test]
    fn params_round_trip_exactly() {
        let dir = std::env::temp_dir().join("slate_forge_test_slpr");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("params.slpr");
        let params = PolicyParams::linear(3, (0..9).map(|i| i as f64 * 0.1).collect()).unwrap();
        write_params(&params, &path).unwrap();
        let back = read_params(&path).unwrap();
        assert_eq!(params, back);
    }

    #[test]
    fn rejects_corrupt_files() {
        let dir = std::env::temp_dir().join("slate_forge_test_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.sleb");
        std::fs::write(&path, b"not a real file").unwrap();
        assert!(read_embeddings(&path).is_err());
        assert!(read_params(&path).is_err());
        assert!(read_embeddings(Path::new("/nonexistent/x.sleb")).is_err());
    }
}
