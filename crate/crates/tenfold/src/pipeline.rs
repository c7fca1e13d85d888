//! Whole-setup analysis: split into blocks, transfer, classify and
//! optionally check every block against the brute-force oracle.

use serde::Serialize;

use crate::classify::{classify_block, describe, CartanDescriptor};
use crate::ensemble;
use crate::error::Result;
use crate::matkit::Tolerance;
use crate::nambu::{build_blocks, NambuBlock, SymmetrySetup};
use crate::transfer::{reduce_block, TransferRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockResult {
    pub component_tags: Vec<String>,
    pub block_dim: usize,
    pub doubled: bool,
    pub descriptor: CartanDescriptor,
    pub description: String,
    pub transfer: TransferRecord,
    pub dim_formula: usize,
    pub dim_oracle: Option<usize>,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub blocks: Vec<BlockResult>,
    pub total_dim: usize,
    pub total_dim_oracle: Option<usize>,
    pub unsplit_oracle: Option<usize>,
    pub status: Status,
}

fn analyse_block(setup: &SymmetrySetup, block: &NambuBlock) -> Result<BlockResult> {
    let data = reduce_block(setup, block)?;
    let descriptor = classify_block(&data)?;
    Ok(BlockResult {
        component_tags: block.component_tags.clone(),
        block_dim: block.dim(),
        doubled: block.doubled,
        description: describe(&descriptor),
        dim_formula: descriptor.dim_h,
        transfer: data.record(),
        descriptor,
        dim_oracle: None,
        status: Status::Skipped,
    })
}

/// Classification only; no oracle runs.
pub fn classify_setup(setup: &SymmetrySetup, seed: u64) -> Result<Analysis> {
    let blocks = build_blocks(setup, seed)?;
    let results = blocks.iter().map(|b| analyse_block(setup, b)).collect::<Result<Vec<_>>>()?;
    Ok(Analysis {
        total_dim: results.iter().map(|r| r.dim_formula).sum(),
        blocks: results,
        total_dim_oracle: None,
        unsplit_oracle: None,
        status: Status::Skipped,
    })
}

/// Classification plus per-block and whole-space oracle checks.
pub fn verify_setup(setup: &SymmetrySetup, seed: u64, tol: Tolerance) -> Result<Analysis> {
    let blocks = build_blocks(setup, seed)?;
    let mut results = Vec::new();
    for b in &blocks {
        let mut r = analyse_block(setup, b)?;
        let d = ensemble::block_space(b, tol)?.dim();
        r.dim_oracle = Some(d);
        r.status = if d == r.dim_formula { Status::Pass } else { Status::Fail };
        results.push(r);
    }
    let unsplit = ensemble::hamiltonian_space(setup, tol)?.dim();
    let total: usize = results.iter().map(|r| r.dim_formula).sum();
    let total_oracle: usize = results.iter().filter_map(|r| r.dim_oracle).sum();
    let ok = results.iter().all(|r| r.status == Status::Pass) && total_oracle == unsplit;
    Ok(Analysis {
        blocks: results,
        total_dim: total,
        total_dim_oracle: Some(total_oracle),
        unsplit_oracle: Some(unsplit),
        status: if ok { Status::Pass } else { Status::Fail },
    })
}
