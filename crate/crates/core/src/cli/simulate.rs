//! Repeated random fail-repair rounds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::stripe::{encode_stripes, reconstruct_stripes, repair_stripes};
use crate::codec::{Code, CodecError, DataBlock};
use crate::par::Execution;
use crate::repair::{HelperChoice, RepairError, RepairPlan};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("stage {stage}: regenerated share of node {node} differs from its original")]
    Drift { stage: usize, node: usize },
    #[error("stage {stage}: nodes {nodes:?} reconstruct data different from the original")]
    Mismatch { stage: usize, nodes: Vec<usize> },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Repair(#[from] RepairError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRecord {
    pub stage: usize,
    pub failed: Vec<usize>,
    /// Symbols downloaded by all newcomers for one stripe.
    pub bandwidth: usize,
    pub reconstructed_from: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub stages: Vec<StageRecord>,
    pub cumulative_per_stripe: usize,
    /// `r * gamma * stages`.
    pub expected_per_stripe: usize,
}

/// Encode `blocks`, then for each stage fail a random r-subset, repair it with
/// seeded helpers and check that shares are unchanged and that a random
/// k-subset still reconstructs the data.
pub fn simulate(
    code: &Code,
    blocks: &[DataBlock],
    stages: usize,
    seed: u64,
    exec: Execution,
) -> Result<Simulation, SimulationError> {
    let p = code.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let original = encode_stripes(code, blocks, exec)?;
    let mut current = original.clone();
    let ids: Vec<usize> = (1..=p.n()).collect();
    let mut records = Vec::with_capacity(stages);
    let mut cumulative = 0;

    for stage in 1..=stages {
        let mut failed: Vec<usize> = ids.choose_multiple(&mut rng, p.r()).copied().collect();
        failed.sort_unstable();
        let plan = RepairPlan::new(p, &failed, HelperChoice::Seeded(rng.gen()))?;
        let survivors: Vec<_> = ids
            .iter()
            .filter(|i| !failed.contains(i))
            .map(|&i| current[i - 1].clone())
            .collect();
        let out = repair_stripes(code, &survivors, &plan, exec)?;
        for (&i, shares) in plan.failed().iter().zip(out.newcomers) {
            current[i - 1] = shares;
        }
        if let Some(node) = ids
            .iter()
            .copied()
            .find(|&i| current[i - 1] != original[i - 1])
        {
            return Err(SimulationError::Drift { stage, node });
        }

        let mut readers: Vec<usize> = ids.choose_multiple(&mut rng, p.k()).copied().collect();
        readers.sort_unstable();
        let chosen: Vec<_> = readers.iter().map(|&i| current[i - 1].clone()).collect();
        if reconstruct_stripes(code, &chosen, exec)? != blocks {
            return Err(SimulationError::Mismatch {
                stage,
                nodes: readers,
            });
        }

        let bandwidth = out.per_stripe.system_total();
        cumulative += bandwidth;
        records.push(StageRecord {
            stage,
            failed,
            bandwidth,
            reconstructed_from: readers,
        });
    }
    Ok(Simulation {
        stages: records,
        cumulative_per_stripe: cumulative,
        expected_per_stripe: p.r() * p.gamma() * stages,
    })
}
