use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::DenseMatrix;

/// Contiguous coordinate range `offset..offset + rows·cols`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
    /// Weight matrices are eligible for orthogonality correction; vectors never are.
    pub matrix: bool,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    blocks: Vec<Block>,
    total: usize,
}

impl ParamLayout {
    /// Blocks must not overlap, ids must be unique, and `total` covers all of them.
    pub fn new(blocks: Vec<Block>, total: usize) -> Result<Self> {
        let mut spans: Vec<(usize, usize)> = blocks.iter().map(|b| (b.offset, b.offset + b.len())).collect();
        spans.sort_unstable();
        if spans.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(LabError::Config("parameter blocks overlap".into()));
        }
        if spans.last().is_some_and(|s| s.1 > total) {
            return Err(LabError::Config("parameter block exceeds total length".into()));
        }
        let mut ids: Vec<&str> = blocks.iter().map(|b| b.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(LabError::Config("duplicate block id".into()));
        }
        Ok(ParamLayout { blocks, total })
    }

    /// Blocks laid out back to back in the given order.
    pub fn sequential(shapes: &[(&str, usize, usize, bool)]) -> Self {
        let mut offset = 0;
        let blocks = shapes
            .iter()
            .map(|&(id, rows, cols, matrix)| {
                let b = Block { id: id.to_string(), offset, rows, cols, matrix };
                offset += rows * cols;
                b
            })
            .collect();
        ParamLayout { blocks, total: offset }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn block(&self, id: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn matrix_blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(|b| b.matrix)
    }

    pub fn matrix(&self, params: &[f64], block: &Block) -> DenseMatrix {
        DenseMatrix::from_fn(block.rows, block.cols, |i, j| params[block.offset + i * block.cols + j])
    }

    /// Splits a flat vector into per-block arrays.
    pub fn unflatten(&self, params: &[f64]) -> Result<BTreeMap<String, Vec<f64>>> {
        if params.len() != self.total {
            return Err(LabError::Dimension(format!("{} parameters for a layout of {}", params.len(), self.total)));
        }
        Ok(self.blocks.iter().map(|b| (b.id.clone(), params[b.range()].to_vec())).collect())
    }

    /// Inverse of [`unflatten`](Self::unflatten); coordinates outside every block are zero.
    pub fn flatten(&self, by_block: &BTreeMap<String, Vec<f64>>) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.total];
        for b in &self.blocks {
            let src = by_block
                .get(&b.id)
                .ok_or_else(|| LabError::Config(format!("missing parameter block {}", b.id)))?;
            if src.len() != b.len() {
                return Err(LabError::Dimension(format!("block {} has {} values, expected {}", b.id, src.len(), b.len())));
            }
            out[b.range()].copy_from_slice(src);
        }
        if by_block.len() != self.blocks.len() {
            return Err(LabError::Config("unknown parameter block in input".into()));
        }
        Ok(out)
    }
}
