//! Two-phase cooperative repair of `r` simultaneous failures.
//!
//! Phase 1: helper `j` sends newcomer `i` the pair `(F(x_j, y_i), F(x_i, y_j))`,
//! i.e. `(f_j(y_i), g_j(x_i))`. From the `d` first components the newcomer
//! interpolates `g_i(X)`.
//!
//! Phase 2: every other newcomer `j` sends `g_j(x_i) = F(x_i, y_j)`. Together
//! with the `d` second components from phase 1 and its own `g_i(x_i)`, the
//! newcomer has `d + r` samples of `f_i(Y)` and regenerates its share exactly.
//!
//! Each newcomer downloads `2d + (r - 1)` symbols, which equals `alpha`.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{Code, CodeParams, CodecError, Share, SharePolys};
use crate::par::Execution;
use crate::poly::{interpolate, PolyError, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("expected r = {expected} failed nodes, got {got}")]
    FailedCount { expected: usize, got: usize },
    #[error("node {0} listed twice among the failed nodes")]
    DuplicateFailed(usize),
    #[error("node id {id} outside [1, {n}]")]
    NodeId { id: usize, n: usize },
    #[error("newcomer {newcomer} needs d = {expected} helpers, got {got}")]
    HelperCount {
        newcomer: usize,
        expected: usize,
        got: usize,
    },
    #[error("helper {helper} of newcomer {newcomer} is itself a failed node")]
    HelperFailed { newcomer: usize, helper: usize },
    #[error("helper {helper} listed twice for newcomer {newcomer}")]
    DuplicateHelper { newcomer: usize, helper: usize },
    #[error("no helper set given for newcomer {0}")]
    MissingHelpers(usize),
    #[error("helper set given for node {0}, which is not a failed node")]
    UnknownNewcomer(usize),
    #[error("node {0} cannot help repair itself")]
    SelfRepair(usize),
    #[error("message from {from} to {to} was not expected by newcomer {newcomer}")]
    UnexpectedMessage {
        from: usize,
        to: usize,
        newcomer: usize,
    },
    #[error("newcomer {newcomer} is missing the message from node {from}")]
    MissingMessage { newcomer: usize, from: usize },
    #[error("newcomer {0} has not completed phase 1")]
    Phase1Incomplete(usize),
    #[error("evaluation points collide while regenerating node {0}")]
    PointCollision(usize),
    #[error("survivor share for helper {0} is missing")]
    MissingSurvivor(usize),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// How helpers are assigned to newcomers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HelperChoice {
    /// Each newcomer draws `d` helpers uniformly from the survivors.
    Seeded(u64),
    /// Ordered helper list per newcomer.
    Explicit(BTreeMap<usize, Vec<usize>>),
}

/// The failed set `R` and the helper set of every newcomer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairPlan {
    failed: Vec<usize>,
    helpers: BTreeMap<usize, Vec<usize>>,
}

impl RepairPlan {
    pub fn new(
        params: &CodeParams,
        failed: &[usize],
        choice: HelperChoice,
    ) -> Result<Self, RepairError> {
        let n = params.n();
        if failed.len() != params.r() {
            return Err(RepairError::FailedCount {
                expected: params.r(),
                got: failed.len(),
            });
        }
        let mut set = BTreeSet::new();
        for &id in failed {
            if id < 1 || id > n {
                return Err(RepairError::NodeId { id, n });
            }
            if !set.insert(id) {
                return Err(RepairError::DuplicateFailed(id));
            }
        }
        let failed: Vec<usize> = set.into_iter().collect();
        let helpers = match choice {
            HelperChoice::Seeded(seed) => {
                let survivors: Vec<usize> = (1..=n).filter(|id| !failed.contains(id)).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                failed
                    .iter()
                    .map(|&i| {
                        let chosen = survivors
                            .choose_multiple(&mut rng, params.d())
                            .copied()
                            .collect();
                        (i, chosen)
                    })
                    .collect()
            }
            HelperChoice::Explicit(map) => map,
        };
        let plan = Self { failed, helpers };
        plan.validate(params)?;
        Ok(plan)
    }

    fn validate(&self, params: &CodeParams) -> Result<(), RepairError> {
        let n = params.n();
        if let Some(&extra) = self.helpers.keys().find(|id| !self.failed.contains(id)) {
            return Err(RepairError::UnknownNewcomer(extra));
        }
        for &i in &self.failed {
            let hs = self.helpers.get(&i).ok_or(RepairError::MissingHelpers(i))?;
            if hs.len() != params.d() {
                return Err(RepairError::HelperCount {
                    newcomer: i,
                    expected: params.d(),
                    got: hs.len(),
                });
            }
            let mut seen = BTreeSet::new();
            for &h in hs {
                if h < 1 || h > n {
                    return Err(RepairError::NodeId { id: h, n });
                }
                if self.failed.contains(&h) {
                    return Err(RepairError::HelperFailed {
                        newcomer: i,
                        helper: h,
                    });
                }
                if !seen.insert(h) {
                    return Err(RepairError::DuplicateHelper {
                        newcomer: i,
                        helper: h,
                    });
                }
            }
        }
        Ok(())
    }

    /// Failed node ids, ascending.
    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn helpers(&self, newcomer: usize) -> &[usize] {
        self.helpers
            .get(&newcomer)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn helper_map(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.helpers
    }

    /// Helpers shared by every newcomer in `newcomers`; all survivors when
    /// `newcomers` is empty.
    pub fn common_helpers(&self, params: &CodeParams, newcomers: &[usize]) -> Vec<usize> {
        (1..=params.n())
            .filter(|h| !self.failed.contains(h))
            .filter(|h| newcomers.iter().all(|i| self.helpers(*i).contains(h)))
            .collect()
    }

    /// Every node that acts as a helper for someone.
    pub fn all_helpers(&self) -> BTreeSet<usize> {
        self.helpers.values().flatten().copied().collect()
    }
}

/// Phase-1 message: `(F(x_from, y_to), F(x_to, y_from))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase1Msg {
    pub from: usize,
    pub to: usize,
    pub payload: [u32; 2],
}

impl Phase1Msg {
    pub const SYMBOLS: usize = 2;
}

/// Phase-2 message: `F(x_to, y_from)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase2Msg {
    pub from: usize,
    pub to: usize,
    pub payload: u32,
}

impl Phase2Msg {
    pub const SYMBOLS: usize = 1;
}

/// What a newcomer knows between the phases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewcomerState {
    node_id: usize,
    g: Option<UniPoly>,
    /// `(y_j, F(x_i, y_j))` for each helper `j`.
    f_samples: Vec<(u32, u32)>,
}

impl NewcomerState {
    /// A newcomer that has not received anything yet.
    pub fn pending(node_id: usize) -> Self {
        Self {
            node_id,
            g: None,
            f_samples: Vec::new(),
        }
    }

    pub fn node_id(&self) -> usize {
        self.node_id
    }

    pub fn g(&self) -> Option<&UniPoly> {
        self.g.as_ref()
    }

    pub fn f_samples(&self) -> &[(u32, u32)] {
        &self.f_samples
    }

    pub fn phase1_complete(&self) -> bool {
        self.g.is_some()
    }
}

/// Symbol counts received by one newcomer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NewcomerTraffic {
    pub phase1: usize,
    pub phase2: usize,
}

impl NewcomerTraffic {
    pub fn total(&self) -> usize {
        self.phase1 + self.phase2
    }
}

/// Per-newcomer download accounting for one repair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BandwidthLedger {
    traffic: BTreeMap<usize, NewcomerTraffic>,
}

impl BandwidthLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_phase1(&mut self, msg: &Phase1Msg) {
        self.traffic.entry(msg.to).or_default().phase1 += Phase1Msg::SYMBOLS;
    }

    pub fn record_phase2(&mut self, msg: &Phase2Msg) {
        self.traffic.entry(msg.to).or_default().phase2 += Phase2Msg::SYMBOLS;
    }

    pub fn newcomer(&self, id: usize) -> NewcomerTraffic {
        self.traffic.get(&id).copied().unwrap_or_default()
    }

    pub fn newcomers(&self) -> impl Iterator<Item = (usize, NewcomerTraffic)> + '_ {
        self.traffic.iter().map(|(&id, &t)| (id, t))
    }

    pub fn phase1_total(&self) -> usize {
        self.traffic.values().map(|t| t.phase1).sum()
    }

    pub fn phase2_total(&self) -> usize {
        self.traffic.values().map(|t| t.phase2).sum()
    }

    pub fn system_total(&self) -> usize {
        self.phase1_total() + self.phase2_total()
    }

    /// Add another ledger's counts, e.g. across stripes or stages.
    pub fn absorb(&mut self, other: &BandwidthLedger) {
        for (id, t) in other.newcomers() {
            let e = self.traffic.entry(id).or_default();
            e.phase1 += t.phase1;
            e.phase2 += t.phase2;
        }
    }
}

/// Phase-1 payload computed from a helper's already-recovered polynomials.
pub fn phase1_from_polys(
    code: &Code,
    helper: usize,
    polys: &SharePolys,
    newcomer: usize,
) -> Result<Phase1Msg, RepairError> {
    if helper == newcomer {
        return Err(RepairError::SelfRepair(helper));
    }
    code.check_node(newcomer)?;
    let field = code.field();
    let pts = code.points();
    Ok(Phase1Msg {
        from: helper,
        to: newcomer,
        payload: [
            polys.f.eval(&field, pts.y(newcomer)),
            polys.g.eval(&field, pts.x(newcomer)),
        ],
    })
}

/// Helper side of phase 1: read the whole share, send two symbols.
pub fn phase1_send(
    code: &Code,
    helper_share: &Share,
    newcomer: usize,
) -> Result<Phase1Msg, RepairError> {
    if helper_share.node_id == newcomer {
        return Err(RepairError::SelfRepair(newcomer));
    }
    let polys = code.share_polys(helper_share)?;
    phase1_from_polys(code, helper_share.node_id, &polys, newcomer)
}

/// Newcomer side of phase 1: recover `g_i` from the helpers' messages.
pub fn phase1_assemble(
    code: &Code,
    plan: &RepairPlan,
    newcomer: usize,
    msgs: &[Phase1Msg],
) -> Result<NewcomerState, RepairError> {
    let helpers = plan.helpers(newcomer);
    if helpers.is_empty() {
        return Err(RepairError::MissingHelpers(newcomer));
    }
    let mut by_helper = BTreeMap::new();
    for m in msgs {
        if m.to != newcomer || !helpers.contains(&m.from) || by_helper.insert(m.from, *m).is_some()
        {
            return Err(RepairError::UnexpectedMessage {
                from: m.from,
                to: m.to,
                newcomer,
            });
        }
    }
    let field = code.field();
    let pts = code.points();
    let mut g_points = Vec::with_capacity(helpers.len());
    let mut f_samples = Vec::with_capacity(helpers.len());
    for &h in helpers {
        let m = by_helper
            .get(&h)
            .ok_or(RepairError::MissingMessage { newcomer, from: h })?;
        g_points.push((pts.x(h), m.payload[0]));
        f_samples.push((pts.y(h), m.payload[1]));
    }
    let g = interpolate(&field, &g_points, code.params().d()).map_err(|e| match e {
        PolyError::DuplicateAbscissa(_) => RepairError::PointCollision(newcomer),
        other => other.into(),
    })?;
    Ok(NewcomerState {
        node_id: newcomer,
        g: Some(g),
        f_samples,
    })
}

/// Newcomer `state.node_id` sends `g_j(x_to)` to newcomer `to`.
pub fn phase2_send(
    code: &Code,
    state: &NewcomerState,
    to: usize,
) -> Result<Phase2Msg, RepairError> {
    if to == state.node_id {
        return Err(RepairError::SelfRepair(to));
    }
    code.check_node(to)?;
    let g = state
        .g
        .as_ref()
        .ok_or(RepairError::Phase1Incomplete(state.node_id))?;
    Ok(Phase2Msg {
        from: state.node_id,
        to,
        payload: g.eval(&code.field(), code.points().x(to)),
    })
}

/// Rebuild the newcomer's share from its phase-1 state and the `r - 1`
/// phase-2 messages.
pub fn regenerate(
    code: &Code,
    plan: &RepairPlan,
    state: &NewcomerState,
    phase2: &[Phase2Msg],
) -> Result<Share, RepairError> {
    let i = state.node_id;
    let g = state.g.as_ref().ok_or(RepairError::Phase1Incomplete(i))?;
    let peers: Vec<usize> = plan.failed().iter().copied().filter(|&p| p != i).collect();
    let mut by_peer = BTreeMap::new();
    for m in phase2 {
        if m.to != i || !peers.contains(&m.from) || by_peer.insert(m.from, m.payload).is_some() {
            return Err(RepairError::UnexpectedMessage {
                from: m.from,
                to: m.to,
                newcomer: i,
            });
        }
    }
    let field = code.field();
    let pts = code.points();
    let mut f_points = state.f_samples.clone();
    for &p in &peers {
        let v = by_peer.get(&p).ok_or(RepairError::MissingMessage {
            newcomer: i,
            from: p,
        })?;
        f_points.push((pts.y(p), *v));
    }
    f_points.push((pts.y(i), g.eval(&field, pts.x(i))));
    let p = code.params();
    let f = interpolate(&field, &f_points, p.d() + p.r()).map_err(|e| match e {
        PolyError::DuplicateAbscissa(_) => RepairError::PointCollision(i),
        other => other.into(),
    })?;
    Ok(code.share_from_polys(i, &SharePolys { f, g: g.clone() }))
}

/// Outcome of one cooperative repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairOutcome {
    /// Regenerated shares in ascending node order.
    pub shares: Vec<Share>,
    pub ledger: BandwidthLedger,
}

/// Run both phases for every newcomer in `plan`.
///
/// All phase-1 work completes before any phase-2 message is produced; within
/// a phase newcomers are processed independently under `exec`.
pub fn run_repair(
    code: &Code,
    survivors: &[Share],
    plan: &RepairPlan,
    exec: Execution,
) -> Result<RepairOutcome, RepairError> {
    let by_id: BTreeMap<usize, &Share> = survivors.iter().map(|s| (s.node_id, s)).collect();
    let helper_ids: Vec<usize> = plan.all_helpers().into_iter().collect();
    let helper_polys: BTreeMap<usize, SharePolys> = exec
        .try_map(&helper_ids, |&h| {
            let share = by_id.get(&h).ok_or(RepairError::MissingSurvivor(h))?;
            Ok::<_, RepairError>((h, code.share_polys(share)?))
        })?
        .into_iter()
        .collect();

    let phase1: Vec<(NewcomerState, Vec<Phase1Msg>)> = exec.try_map(plan.failed(), |&i| {
        let msgs = plan
            .helpers(i)
            .iter()
            .map(|&h| phase1_from_polys(code, h, &helper_polys[&h], i))
            .collect::<Result<Vec<_>, _>>()?;
        let state = phase1_assemble(code, plan, i, &msgs)?;
        Ok::<_, RepairError>((state, msgs))
    })?;

    let states: Vec<&NewcomerState> = phase1.iter().map(|(s, _)| s).collect();
    let phase2: Vec<(Share, Vec<Phase2Msg>)> = exec.try_map(&states, |state| {
        let i = state.node_id;
        let msgs = states
            .iter()
            .filter(|s| s.node_id != i)
            .map(|s| phase2_send(code, s, i))
            .collect::<Result<Vec<_>, _>>()?;
        let share = regenerate(code, plan, state, &msgs)?;
        Ok::<_, RepairError>((share, msgs))
    })?;

    let mut ledger = BandwidthLedger::new();
    for (_, msgs) in &phase1 {
        msgs.iter().for_each(|m| ledger.record_phase1(m));
    }
    for (_, msgs) in &phase2 {
        msgs.iter().for_each(|m| ledger.record_phase2(m));
    }
    let shares = phase2.into_iter().map(|(s, _)| s).collect();
    Ok(RepairOutcome { shares, ledger })
}
