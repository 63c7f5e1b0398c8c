use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sharefile::{share_file_name, write_atomic, ShareFile};
use super::simulate::{simulate as run_simulation, SimulationError};
use super::stripe::{encode_stripes, join, reconstruct_stripes, repair_stripes, StripePlan};
use super::{code_params, parse_helpers, seeded_plans, usage, VerificationFailure};
use super::{
    BoundArgs, EncodeArgs, ParamsArgs, ReconstructArgs, RepairArgs, SimulateArgs, VerifyArgs,
};
use crate::bounds::{
    cutset_rhs, enumerate_compositions, max_file_size, mbcr_point, mscr_point, Rational,
};
use crate::codec::{Code, DataBlock};
use crate::gf::Field;
use crate::par::Execution;
use crate::repair::{HelperChoice, RepairPlan};
use crate::subspace::SpaceModel;

pub(super) fn params(a: &ParamsArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let p = code_params(&a.code, a.field.field()?)?;
    let overhead = Ratio::new((p.n() * p.alpha()) as i64, p.file_size() as i64);
    writeln!(
        out,
        "n={} k={} d={} r={} field={}",
        p.n(),
        p.k(),
        p.d(),
        p.r(),
        p.field()
    )?;
    writeln!(out, "alpha    {}", p.alpha())?;
    writeln!(out, "beta1    {}", p.beta1())?;
    writeln!(out, "beta2    {}", p.beta2())?;
    writeln!(out, "B        {}", p.file_size())?;
    writeln!(out, "gamma    {}", p.gamma())?;
    writeln!(
        out,
        "overhead {} ({:.3})",
        overhead,
        *overhead.numer() as f64 / *overhead.denom() as f64
    )?;
    Ok(())
}

pub(super) fn encode(a: &EncodeArgs, exec: Execution, out: &mut impl Write) -> anyhow::Result<()> {
    if a.field.q.is_some() {
        return Err(usage(
            "encode stores one byte per symbol and only supports GF(2^8)",
        ));
    }
    let code = Code::new(code_params(&a.code, Field::gf256())?);
    let p = code.params();
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let plan = StripePlan::new(bytes.len(), p.file_size());
    let nodes = encode_stripes(&code, &plan.split(&bytes), exec)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for (idx, shares) in nodes.iter().enumerate() {
        let file = ShareFile::from_shares(p, idx + 1, shares, bytes.len() as u64)?;
        file.write_atomic(&a.out.join(share_file_name(idx + 1)))?;
    }
    writeln!(
        out,
        "encoded {} bytes into {} stripes of {} symbols ({} padding)",
        bytes.len(),
        plan.stripe_count,
        p.file_size(),
        plan.pad_length
    )?;
    writeln!(
        out,
        "wrote {} shares of {} payload bytes to {}",
        p.n(),
        plan.stripe_count * p.alpha(),
        a.out.display()
    )?;
    Ok(())
}

fn read_shares(paths: &[impl AsRef<Path>]) -> anyhow::Result<Vec<ShareFile>> {
    let files = paths
        .iter()
        .map(|p| ShareFile::read(p.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let first = files.first().ok_or_else(|| usage("no share files given"))?;
    if let Some(bad) = files.iter().find(|f| !f.header.same_code(&first.header)) {
        bail!(
            "share of node {} has header {:?}, which does not match node {}'s {:?}",
            bad.node_id(),
            bad.header,
            first.node_id(),
            first.header
        );
    }
    let mut seen = BTreeSet::new();
    for f in &files {
        if !seen.insert(f.node_id()) {
            return Err(usage(format!("node {} supplied twice", f.node_id())));
        }
    }
    Ok(files)
}

pub(super) fn reconstruct(
    a: &ReconstructArgs,
    exec: Execution,
    out: &mut impl Write,
) -> anyhow::Result<()> {
    let mut files = read_shares(&a.shares)?;
    let header = files[0].header;
    let code = Code::new(header.params()?);
    let k = code.params().k();
    if files.len() < k {
        return Err(usage(format!(
            "insufficient shares: got {}, need k = {k}",
            files.len()
        )));
    }
    files.sort_by_key(ShareFile::node_id);
    files.truncate(k);
    let nodes = files
        .iter()
        .map(ShareFile::shares)
        .collect::<Result<Vec<_>, _>>()?;
    let blocks = reconstruct_stripes(&code, &nodes, exec)?;
    let len = usize::try_from(header.original_length)
        .context("recorded length does not fit in memory")?;
    let bytes = join(&blocks, len);
    write_atomic(&a.out, &bytes)?;
    let used: Vec<String> = files.iter().map(|f| f.node_id().to_string()).collect();
    writeln!(
        out,
        "reconstructed {} bytes from nodes {}",
        bytes.len(),
        used.join(",")
    )?;
    Ok(())
}

pub(super) fn repair(a: &RepairArgs, exec: Execution, out: &mut impl Write) -> anyhow::Result<()> {
    let mut files = read_shares(&a.shares)?;
    let header = files[0].header;
    let code = Code::new(header.params()?);
    let p = code.params();
    if let Some(f) = files.iter().find(|f| a.failed.contains(&f.node_id())) {
        return Err(usage(format!(
            "node {} is listed as failed but its share was supplied",
            f.node_id()
        )));
    }
    let choice = match &a.helpers {
        Some(spec) => HelperChoice::Explicit(parse_helpers(spec)?),
        None => HelperChoice::Seeded(a.seed),
    };
    let plan = RepairPlan::new(p, &a.failed, choice).map_err(usage)?;

    files.sort_by_key(ShareFile::node_id);
    let survivors = files
        .iter()
        .map(ShareFile::shares)
        .collect::<Result<Vec<_>, _>>()?;
    let result = repair_stripes(&code, &survivors, &plan, exec)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for (&id, shares) in plan.failed().iter().zip(&result.newcomers) {
        let file = ShareFile::from_shares(p, id, shares, header.original_length)?;
        file.write_atomic(&a.out.join(share_file_name(id)))?;
    }

    let stripes = header.stripe_count as usize;
    for &i in plan.failed() {
        let helpers: Vec<String> = plan.helpers(i).iter().map(usize::to_string).collect();
        let t = result.per_stripe.newcomer(i);
        writeln!(
            out,
            "newcomer {i}: helpers {} phase1 {} phase2 {} total {} symbols/stripe, {} bytes over {stripes} stripes",
            helpers.join("+"),
            t.phase1,
            t.phase2,
            t.total(),
            result.total.newcomer(i).total()
        )?;
    }
    writeln!(
        out,
        "system: {} symbols/stripe (r*gamma = {}), {} bytes total",
        result.per_stripe.system_total(),
        p.r() * p.gamma(),
        result.total.system_total()
    )?;
    Ok(())
}

fn bound_report(k: usize, d: usize, r: usize, n: usize) -> (bool, String) {
    let b = Rational::from_integer((k * (2 * d + r - k)) as i64);
    let point = mbcr_point(k, d, r, b);
    let ok = max_file_size(k, d, r, &point) == b;
    (ok, format!("n={n},k={k},d={d},r={r}"))
}

pub(super) fn verify(a: &VerifyArgs, exec: Execution, out: &mut impl Write) -> anyhow::Result<()> {
    let code = Code::new(code_params(&a.code, a.field.field()?)?);
    let p = code.params();
    let model = if a.inject_fault {
        SpaceModel::with_fault(&code, 1)
    } else {
        SpaceModel::new(&code)
    };
    let plans = seeded_plans(p, a.plans, a.seed);
    let mut report = model.check_all(&plans, exec);
    let (ok, indices) = bound_report(p.k(), p.d(), p.r(), p.n());
    report.push("bound.cutset_equality", indices, ok);
    write!(out, "{report}")?;
    let failed = report.failures().count();
    writeln!(out, "{} checks, {} failed", report.entries.len(), failed)?;
    if failed > 0 {
        return Err(VerificationFailure(format!(
            "{failed} of {} checks failed",
            report.entries.len()
        ))
        .into());
    }
    Ok(())
}

fn validate_shape(n: usize, k: usize, d: usize, r: usize) -> anyhow::Result<()> {
    // any field with at least n elements, only the shape matters here
    let field = Field::smallest_prime_at_least(n.min(u16::MAX as usize) as u32).map_err(usage)?;
    crate::codec::CodeParams::new(n, k, d, r, field).map_err(usage)?;
    Ok(())
}

pub(super) fn bound(a: &BoundArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let c = &a.code;
    validate_shape(c.n, c.k, c.d, c.r)?;
    let (k, d, r) = (c.k, c.d, c.r);
    let b = Rational::from_integer((k * (2 * d + r - k)) as i64);
    let mbcr = mbcr_point(k, d, r, b);
    let mscr = mscr_point(k, d, r, b);
    writeln!(out, "MBCR {mbcr}")?;
    writeln!(out, "MSCR {mscr}")?;
    writeln!(out, "cut-set terms at the MBCR point:")?;
    for comp in enumerate_compositions(k, r) {
        writeln!(out, "  {comp:<16} {}", cutset_rhs(d, r, &mbcr, &comp))?;
    }
    let max = max_file_size(k, d, r, &mbcr);
    writeln!(out, "max file size {max}, B = {b}")?;
    if max != b {
        return Err(
            VerificationFailure(format!("cut-set bound {max} differs from B = {b}")).into(),
        );
    }
    writeln!(out, "bound met with equality")?;
    Ok(())
}

pub(super) fn simulate(
    a: &SimulateArgs,
    exec: Execution,
    out: &mut impl Write,
) -> anyhow::Result<()> {
    if a.stages == 0 || a.stripes == 0 {
        return Err(usage("--stages and --stripes must be at least 1"));
    }
    let code = Code::new(code_params(&a.code, a.field.field()?)?);
    let p = code.params();
    let field = p.field();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let blocks: Vec<DataBlock> = (0..a.stripes)
        .map(|_| {
            DataBlock::new(
                (0..p.file_size())
                    .map(|_| rng.gen_range(0..field.order()))
                    .collect(),
            )
        })
        .collect();
    let sim = run_simulation(&code, &blocks, a.stages, rng.gen(), exec).map_err(|e| match e {
        SimulationError::Drift { .. } | SimulationError::Mismatch { .. } => {
            VerificationFailure(e.to_string()).into()
        }
        other => anyhow::Error::new(other),
    })?;
    writeln!(
        out,
        "simulating {} stages over {field}, {} stripes",
        a.stages, a.stripes
    )?;
    let mut cumulative = 0;
    for s in &sim.stages {
        cumulative += s.bandwidth;
        let failed: Vec<String> = s.failed.iter().map(usize::to_string).collect();
        let readers: Vec<String> = s.reconstructed_from.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "stage {}: failed {} bandwidth {} cumulative {} reconstructed from {}",
            s.stage,
            failed.join("+"),
            s.bandwidth,
            cumulative,
            readers.join("+")
        )?;
    }
    writeln!(
        out,
        "cumulative {} symbols/stripe, expected {} (r*gamma*stages)",
        sim.cumulative_per_stripe, sim.expected_per_stripe
    )?;
    if sim.cumulative_per_stripe != sim.expected_per_stripe {
        return Err(
            VerificationFailure("cumulative bandwidth differs from r*gamma*stages".into()).into(),
        );
    }
    writeln!(
        out,
        "all shares equal their stage-0 contents; reconstruction matched every stage"
    )?;
    Ok(())
}
