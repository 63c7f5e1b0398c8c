//! Splitting byte streams into B-symbol stripes and running the scalar code
//! on each stripe independently.
//!
//! Shares are kept node-major: `nodes[t][s]` is stripe `s` of the `t`-th node
//! in the list.

use crate::codec::{Code, CodecError, DataBlock, Share};
use crate::par::Execution;
use crate::repair::{run_repair, BandwidthLedger, RepairError, RepairPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StripePlan {
    pub stripe_size: usize,
    pub stripe_count: usize,
    pub pad_length: usize,
    pub original_length: usize,
}

impl StripePlan {
    /// At least one stripe, even for empty input; the tail is zero padded.
    pub fn new(original_length: usize, stripe_size: usize) -> Self {
        let stripe_count = original_length.div_ceil(stripe_size).max(1);
        Self {
            stripe_size,
            stripe_count,
            pad_length: stripe_count * stripe_size - original_length,
            original_length,
        }
    }

    pub fn split(&self, bytes: &[u8]) -> Vec<DataBlock> {
        assert_eq!(bytes.len(), self.original_length);
        (0..self.stripe_count)
            .map(|s| {
                let mut block = vec![0u32; self.stripe_size];
                let start = s * self.stripe_size;
                let end = bytes.len().min(start + self.stripe_size);
                for (dst, &b) in block.iter_mut().zip(&bytes[start.min(end)..end]) {
                    *dst = b as u32;
                }
                DataBlock::new(block)
            })
            .collect()
    }
}

/// Concatenate stripes and drop the padding.
pub fn join(blocks: &[DataBlock], original_length: usize) -> Vec<u8> {
    let mut out: Vec<u8> = blocks
        .iter()
        .flat_map(|b| b.symbols().iter().map(|&v| v as u8))
        .collect();
    out.truncate(original_length);
    out
}

fn transpose(rows: Vec<Vec<Share>>) -> Vec<Vec<Share>> {
    let width = rows.first().map_or(0, Vec::len);
    let mut cols: Vec<Vec<Share>> = (0..width).map(|_| Vec::with_capacity(rows.len())).collect();
    for row in rows {
        for (col, share) in cols.iter_mut().zip(row) {
            col.push(share);
        }
    }
    cols
}

/// Encode every stripe; returns `n` node-major share lists.
pub fn encode_stripes(
    code: &Code,
    blocks: &[DataBlock],
    exec: Execution,
) -> Result<Vec<Vec<Share>>, CodecError> {
    let per_stripe = exec.try_map(blocks, |b| code.encode(b))?;
    Ok(transpose(per_stripe))
}

fn stripe_count(nodes: &[Vec<Share>]) -> usize {
    nodes.first().map_or(0, Vec::len)
}

/// Reconstruct every stripe from `k` node-major share lists.
pub fn reconstruct_stripes(
    code: &Code,
    nodes: &[Vec<Share>],
    exec: Execution,
) -> Result<Vec<DataBlock>, CodecError> {
    exec.try_map_range(0..stripe_count(nodes), |s| {
        let shares: Vec<Share> = nodes.iter().map(|n| n[s].clone()).collect();
        code.reconstruct(&shares)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripeRepair {
    /// Regenerated node-major shares, in the plan's failed-node order.
    pub newcomers: Vec<Vec<Share>>,
    /// Traffic of a single stripe (identical for every stripe).
    pub per_stripe: BandwidthLedger,
    pub total: BandwidthLedger,
}

/// Repair every stripe under one plan from node-major survivor shares.
pub fn repair_stripes(
    code: &Code,
    survivors: &[Vec<Share>],
    plan: &RepairPlan,
    exec: Execution,
) -> Result<StripeRepair, RepairError> {
    let outcomes = exec.try_map_range(0..stripe_count(survivors), |s| {
        let shares: Vec<Share> = survivors.iter().map(|n| n[s].clone()).collect();
        // stripes already fan out, so each repair runs sequentially inside
        run_repair(code, &shares, plan, Execution::Sequential)
    })?;
    let mut total = BandwidthLedger::new();
    outcomes.iter().for_each(|o| total.absorb(&o.ledger));
    let per_stripe = outcomes
        .first()
        .map(|o| o.ledger.clone())
        .unwrap_or_default();
    let newcomers = transpose(outcomes.into_iter().map(|o| o.shares).collect());
    Ok(StripeRepair {
        newcomers,
        per_stripe,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::CodeParams;
    use crate::gf::Field;
    use crate::repair::HelperChoice;

    fn sample() -> Code {
        Code::new(CodeParams::new(5, 2, 3, 2, Field::gf256()).unwrap())
    }

    #[test]
    fn plan_padding() {
        assert_eq!(
            StripePlan::new(0, 12),
            StripePlan {
                stripe_size: 12,
                stripe_count: 1,
                pad_length: 12,
                original_length: 0
            }
        );
        assert_eq!(StripePlan::new(24, 12).stripe_count, 2);
        assert_eq!(StripePlan::new(25, 12).pad_length, 11);
        let p = StripePlan::new(5, 4);
        let blocks = p.split(&[1, 2, 3, 4, 5]);
        assert_eq!(blocks[1].symbols(), &[5, 0, 0, 0]);
        assert_eq!(join(&blocks, 5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn stripes_round_trip_in_both_modes() {
        let code = sample();
        let bytes: Vec<u8> = (0..24u8).map(|b| b.wrapping_mul(37)).collect();
        let plan = StripePlan::new(bytes.len(), code.params().file_size());
        let blocks = plan.split(&bytes);
        let seq = encode_stripes(&code, &blocks, Execution::Sequential).unwrap();
        let par = encode_stripes(&code, &blocks, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.len(), 5);
        assert!(seq
            .iter()
            .all(|n| n.len() == 2 && n.iter().all(|s| s.evals.len() == 7)));
        let got = reconstruct_stripes(
            &code,
            &[seq[1].clone(), seq[4].clone()],
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(join(&got, bytes.len()), bytes);

        let rp = RepairPlan::new(code.params(), &[1, 2], HelperChoice::Seeded(3)).unwrap();
        let out = repair_stripes(&code, &seq[2..], &rp, Execution::Parallel).unwrap();
        assert_eq!(out.newcomers, seq[..2].to_vec());
        assert_eq!(out.per_stripe.system_total(), 14);
        assert_eq!(out.total.system_total(), 28);
    }
}
