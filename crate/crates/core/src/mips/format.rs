//! Binary serialization of the small-world graph (the `.slmi` artifact).
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic  b"SLMI"
//! version    u32   (currently 1)
//! P          u64   catalog size
//! L          u32   embedding dimension
//! max_degree u32
//! entry      u64   entry node id
//! per node 0..P:
//!   levels   u32   number of layers the node appears in (>= 1)
//!   per layer 0..levels:
//!     count  u32
//!     ids    u64 * count
//! ```

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mips::nsw::NswGraph;

const MAGIC: &[u8; 4] = b"SLMI";
const VERSION: u32 = 1;

/// Serializes a graph into a byte buffer.
pub fn write_graph(graph: &NswGraph, out: &mut Vec<u8>) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(graph.num_actions as u64).to_le_bytes());
    out.extend_from_slice(&(graph.dim as u32).to_le_bytes());
    out.extend_from_slice(&(graph.max_degree as u32).to_le_bytes());
    out.extend_from_slice(&(graph.entry as u64).to_le_bytes());
    for layers in &graph.adjacency {
        out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
        for list in layers {
            out.extend_from_slice(&(list.len() as u32).to_le_bytes());
            for &id in list {
                out.extend_from_slice(&(id as u64).to_le_bytes());
            }
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(alloc::format!(
                "truncated index: needed {} bytes at offset {}",
                n,
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses a graph from bytes produced by [`write_graph`].
pub fn read_graph(bytes: &[u8]) -> Result<NswGraph> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::Format("bad magic, not an SLMI index".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(alloc::format!(
            "unsupported index version {version}"
        )));
    }
    let p = r.u64()? as usize;
    let dim = r.u32()? as usize;
    let max_degree = r.u32()? as usize;
    let entry = r.u64()?;
    if p == 0 {
        return Err(Error::Format("index with empty catalog".into()));
    }
    if entry >= p as u64 {
        return Err(Error::Format(alloc::format!(
            "entry node {entry} outside catalog of {p}"
        )));
    }
    let mut adjacency = Vec::with_capacity(p);
    let mut max_level = 0usize;
    let mut seen_level0 = 0usize;
    for node in 0..p {
        let levels = r.u32()? as usize;
        if levels == 0 {
            return Err(Error::Format(alloc::format!(
                "node {node} missing from layer 0"
            )));
        }
        seen_level0 += 1;
        max_level = max_level.max(levels - 1);
        let mut layers = Vec::with_capacity(levels);
        for _ in 0..levels {
            let count = r.u32()? as usize;
            let mut list = Vec::with_capacity(count);
            for _ in 0..count {
                let id = r.u64()?;
                if id >= p as u64 {
                    return Err(Error::Format(alloc::format!(
                        "neighbor id {id} outside catalog of {p}"
                    )));
                }
                list.push(id as u32);
            }
            layers.push(list);
        }
        adjacency.push(layers);
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(alloc::format!(
            "{} trailing bytes after index",
            bytes.len() - r.pos
        )));
    }
    debug_assert_eq!(seen_level0, p);
    Ok(NswGraph {
        num_actions: p,
        dim,
        max_degree,
        adjacency,
        entry: entry as u32,
        max_level,
    })
}
