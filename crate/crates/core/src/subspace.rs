//! Linear algebra over GF(q) and the node-subspace checks.
//!
//! Every stored or transmitted symbol is a linear functional of the data
//! vector `u`; the symbol `F(x, y)` corresponds to the row holding `x^i y^j`
//! at the canonical position of coefficient `(i, j)`. Node `i`'s row space is
//! `W_i`. This module computes ranks, sums and intersections of such spaces
//! and checks the dimension and decomposition identities the code satisfies
//! at the minimum-bandwidth point.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::codec::{Code, PointRef};
use crate::gf::Field;
use crate::par::Execution;
use crate::poly::powers;
use crate::repair::{HelperChoice, RepairPlan};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubspaceError {
    #[error("ambient dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("fields differ: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("flow bound precondition violated: {0}")]
    Precondition(String),
}

/// A subspace of GF(q)^width given by generator rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    field: Field,
    width: usize,
    rows: Vec<Vec<u32>>,
}

/// Row-reduce in place; returns pivot columns and drops zero rows.
fn row_reduce(field: &Field, rows: &mut Vec<Vec<u32>>, width: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..width {
        let Some(p) = (top..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(top, p);
        let inv = field.inv(rows[top][col]).expect("pivot is nonzero");
        for v in rows[top].iter_mut() {
            *v = field.mul(*v, inv);
        }
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != top && row[col] != 0 {
                let factor = row[col];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = field.sub(*v, field.mul(factor, pv));
                }
            }
        }
        pivots.push(col);
        top += 1;
        if top == rows.len() {
            break;
        }
    }
    rows.truncate(top);
    pivots
}

impl Subspace {
    pub fn new(field: Field, width: usize, rows: Vec<Vec<u32>>) -> Result<Self, SubspaceError> {
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(SubspaceError::DimensionMismatch(width, bad.len()));
        }
        Ok(Self { field, width, rows })
    }

    pub fn zero(field: Field, width: usize) -> Self {
        Self {
            field,
            width,
            rows: Vec::new(),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Ambient dimension.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [Vec<u32>] {
        &mut self.rows
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        row_reduce(&self.field, &mut rows, self.width).len()
    }

    /// Same span, with linearly independent rows in reduced echelon form.
    pub fn basis(&self) -> Subspace {
        let mut rows = self.rows.clone();
        row_reduce(&self.field, &mut rows, self.width);
        Subspace {
            field: self.field,
            width: self.width,
            rows,
        }
    }

    fn compatible(&self, other: &Subspace) -> Result<(), SubspaceError> {
        if self.field != other.field {
            return Err(SubspaceError::FieldMismatch(self.field, other.field));
        }
        if self.width != other.width {
            return Err(SubspaceError::DimensionMismatch(self.width, other.width));
        }
        Ok(())
    }

    /// `self + other`, by stacking generators.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace, SubspaceError> {
        self.compatible(other)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Subspace {
            field: self.field,
            width: self.width,
            rows,
        })
    }

    /// Sum of any number of subspaces of GF(q)^width.
    pub fn sum_all<'a>(
        field: Field,
        width: usize,
        parts: impl IntoIterator<Item = &'a Subspace>,
    ) -> Result<Subspace, SubspaceError> {
        parts
            .into_iter()
            .try_fold(Subspace::zero(field, width), |acc, p| acc.sum(p))
    }

    /// `self ∩ other`.
    ///
    /// With bases `A` (rows `a_s`) and `B` (rows `b_t`), the intersection is
    /// `{ sum z_s a_s : sum z_s a_s = sum w_t b_t }`; the coefficient vectors
    /// `(z, w)` form the left kernel of the stacked matrix `[A; B]`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, SubspaceError> {
        self.compatible(other)?;
        let field = self.field;
        let a = self.basis();
        let b = other.basis();
        let (na, nb) = (a.rows.len(), b.rows.len());
        if na == 0 || nb == 0 {
            return Ok(Subspace::zero(field, self.width));
        }
        // transpose of [A; B]: width rows, na + nb columns
        let cols = na + nb;
        let mut t: Vec<Vec<u32>> = (0..self.width)
            .map(|c| a.rows.iter().chain(&b.rows).map(|row| row[c]).collect())
            .collect();
        let pivots = row_reduce(&field, &mut t, cols);
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        let mut rows = Vec::with_capacity(free.len());
        for &fc in &free {
            // kernel vector with z[fc] = 1, pivot entries solved from the RREF
            let mut z = vec![0u32; cols];
            z[fc] = 1;
            for (prow, &pc) in t.iter().zip(&pivots) {
                z[pc] = field.neg(prow[fc]);
            }
            let mut v = vec![0u32; self.width];
            for (s, row) in a.rows.iter().enumerate() {
                if z[s] != 0 {
                    for (o, &x) in v.iter_mut().zip(row) {
                        *o = field.add(*o, field.mul(z[s], x));
                    }
                }
            }
            rows.push(v);
        }
        Ok(Subspace {
            field,
            width: self.width,
            rows,
        })
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Subspace) -> Result<bool, SubspaceError> {
        Ok(self.sum(other)?.rank() == self.rank())
    }

    /// Equality as subspaces (mutual containment).
    pub fn same_span(&self, other: &Subspace) -> Result<bool, SubspaceError> {
        let joint = self.sum(other)?.rank();
        Ok(joint == self.rank() && joint == other.rank())
    }
}

/// True iff the sum of `parts` is direct: the stacked rank equals the sum of
/// the individual ranks.
pub fn is_direct_sum(parts: &[Subspace]) -> Result<bool, SubspaceError> {
    let Some(first) = parts.first() else {
        return Ok(true);
    };
    let total = Subspace::sum_all(first.field, first.width, parts)?.rank();
    Ok(total == parts.iter().map(Subspace::rank).sum::<usize>())
}

/// The functional `u -> F(x, y)` as a row.
pub fn monomial_row(code: &Code, x: u32, y: u32) -> Vec<u32> {
    let field = code.field();
    let layout = code.params().layout();
    let xp = powers(&field, x, layout.x_degree_bound());
    let yp = powers(&field, y, layout.y_degree_bound());
    layout
        .cells()
        .map(|(i, j)| field.mul(xp[i], yp[j]))
        .collect()
}

/// Row of the symbol evaluated at `(x_{x_node}, y_{y_node})`.
pub fn point_row(code: &Code, pt: PointRef) -> Vec<u32> {
    monomial_row(code, code.points().x(pt.x_node), code.points().y(pt.y_node))
}

fn span_of_points(code: &Code, pts: &[PointRef]) -> Subspace {
    let rows = pts.iter().map(|&pt| point_row(code, pt)).collect();
    Subspace {
        field: code.field(),
        width: code.params().file_size(),
        rows,
    }
}

/// `W_i`: one generator row per stored symbol, in share order.
pub fn node_space(code: &Code, i: usize) -> Subspace {
    span_of_points(code, &code.storage_pattern(i))
}

/// Rank of `W_{i_1} + ... + W_{i_m}`.
pub fn stacked_rank(code: &Code, nodes: &[usize]) -> usize {
    let width = code.params().file_size();
    let spaces: Vec<Subspace> = nodes.iter().map(|&i| node_space(code, i)).collect();
    Subspace::sum_all(code.field(), width, &spaces)
        .expect("node spaces share a field and width")
        .rank()
}

/// Subspaces moved during one repair.
#[derive(Debug, Clone)]
pub struct TransferSpaces {
    /// `(helper j, newcomer i)` -> span of `F(x_j, y_i)` and `F(x_i, y_j)`.
    pub s: BTreeMap<(usize, usize), Subspace>,
    /// `(newcomer i', newcomer i)` -> span of `F(x_i, y_{i'})`.
    pub t: BTreeMap<(usize, usize), Subspace>,
}

impl TransferSpaces {
    pub fn build(code: &Code, plan: &RepairPlan) -> Self {
        let mut s = BTreeMap::new();
        let mut t = BTreeMap::new();
        for &i in plan.failed() {
            for &j in plan.helpers(i) {
                let pts = [
                    PointRef {
                        x_node: j,
                        y_node: i,
                    },
                    PointRef {
                        x_node: i,
                        y_node: j,
                    },
                ];
                s.insert((j, i), span_of_points(code, &pts));
            }
            for &ip in plan.failed().iter().filter(|&&ip| ip != i) {
                t.insert(
                    (ip, i),
                    span_of_points(
                        code,
                        &[PointRef {
                            x_node: i,
                            y_node: ip,
                        }],
                    ),
                );
            }
        }
        Self { s, t }
    }
}

/// One named boolean outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckEntry {
    pub name: String,
    pub indices: String,
    pub pass: bool,
}

impl fmt::Display for CheckEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "CHECK {} {} {}", self.name, self.indices, verdict)
    }
}

/// Line-oriented verification report: `CHECK <name> <indices> PASS|FAIL`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn push(&mut self, name: &str, indices: String, pass: bool) {
        self.entries.push(CheckEntry {
            name: name.to_string(),
            indices,
            pass,
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn count(&self, name: &str) -> usize {
        self.entries.iter().filter(|e| e.name == name).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

fn join(ids: &[usize]) -> String {
    if ids.is_empty() {
        return "-".to_string();
    }
    ids.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("+")
}

fn plan_tag(plan: &RepairPlan) -> String {
    format!("R={}", join(plan.failed()))
}

/// Node subspaces of a code, optionally with a deliberately corrupted
/// generator for negative controls.
#[derive(Debug, Clone)]
pub struct SpaceModel<'a> {
    code: &'a Code,
    nodes: Vec<Subspace>,
}

impl<'a> SpaceModel<'a> {
    pub fn new(code: &'a Code) -> Self {
        let nodes = (1..=code.params().n())
            .map(|i| node_space(code, i))
            .collect();
        Self { code, nodes }
    }

    /// Replace the first generator of `W_node` by the zero row.
    pub fn with_fault(code: &'a Code, node: usize) -> Self {
        let mut m = Self::new(code);
        for v in m.nodes[node - 1].rows_mut()[0].iter_mut() {
            *v = 0;
        }
        m
    }

    pub fn code(&self) -> &Code {
        self.code
    }

    pub fn node(&self, i: usize) -> &Subspace {
        &self.nodes[i - 1]
    }

    fn sum_nodes(&self, ids: &[usize]) -> Subspace {
        let p = self.code.params();
        Subspace::sum_all(p.field(), p.file_size(), ids.iter().map(|&i| self.node(i)))
            .expect("node spaces share a field and width")
    }

    /// `dim W_i = alpha` for every node and `dim(W_i ∩ W_j) = beta1` for every
    /// pair.
    pub fn check_node_dims(&self, exec: Execution) -> Report {
        let p = self.code.params();
        let n = p.n();
        let mut report = Report::default();
        for i in 1..=n {
            report.push(
                "node.dim",
                format!("i={i}"),
                self.node(i).rank() == p.alpha(),
            );
        }
        let pairs: Vec<(usize, usize)> = (1..=n)
            .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
            .collect();
        let dims = exec.map(&pairs, |&(i, j)| {
            self.node(i)
                .intersect(self.node(j))
                .expect("compatible")
                .rank()
        });
        for ((i, j), dim) in pairs.into_iter().zip(dims) {
            report.push(
                "pair.intersection_dim",
                format!("i={i},j={j}"),
                dim == p.beta1(),
            );
        }
        report
    }

    /// `W_i = (⊕_j S^(j,i)) ⊕ (⊕_{i'} T^(i',i))` for every newcomer.
    pub fn check_decomposition(&self, plan: &RepairPlan, ts: &TransferSpaces) -> Report {
        let mut report = Report::default();
        for &i in plan.failed() {
            let mut parts: Vec<Subspace> = plan
                .helpers(i)
                .iter()
                .map(|&j| ts.s[&(j, i)].clone())
                .collect();
            parts.extend(
                plan.failed()
                    .iter()
                    .filter(|&&ip| ip != i)
                    .map(|&ip| ts.t[&(ip, i)].clone()),
            );
            let p = self.code.params();
            let total = Subspace::sum_all(p.field(), p.file_size(), &parts).expect("compatible");
            let ok = is_direct_sum(&parts).expect("compatible")
                && total.same_span(self.node(i)).expect("compatible");
            report.push(
                "newcomer.direct_sum",
                format!("{},i={i}", plan_tag(plan)),
                ok,
            );
        }
        report
    }

    /// `dim S^(j,i) = beta1` and `dim T^(i',i) = beta2`.
    pub fn check_transfer_dims(&self, plan: &RepairPlan, ts: &TransferSpaces) -> Report {
        let p = self.code.params();
        let mut report = Report::default();
        for (&(j, i), s) in &ts.s {
            report.push(
                "transfer.helper_dim",
                format!("{},j={j},i={i}", plan_tag(plan)),
                s.rank() == p.beta1(),
            );
        }
        for (&(ip, i), t) in &ts.t {
            report.push(
                "transfer.peer_dim",
                format!("{},from={ip},i={i}", plan_tag(plan)),
                t.rank() == p.beta2(),
            );
        }
        report
    }

    /// `S^(j,i) = W_i ∩ W_j` and `T^(i,i') ⊕ T^(i',i) = W_i ∩ W_{i'}`.
    pub fn check_intersections(&self, plan: &RepairPlan, ts: &TransferSpaces) -> Report {
        let mut report = Report::default();
        for (&(j, i), s) in &ts.s {
            let cap = self.node(i).intersect(self.node(j)).expect("compatible");
            report.push(
                "transfer.helper_is_intersection",
                format!("{},j={j},i={i}", plan_tag(plan)),
                s.same_span(&cap).expect("compatible"),
            );
        }
        for &i in plan.failed() {
            for &ip in plan.failed().iter().filter(|&&ip| ip > i) {
                let pair = [ts.t[&(i, ip)].clone(), ts.t[&(ip, i)].clone()];
                let cap = self.node(i).intersect(self.node(ip)).expect("compatible");
                let joint = pair[0].sum(&pair[1]).expect("compatible");
                let ok = is_direct_sum(&pair).expect("compatible")
                    && joint.same_span(&cap).expect("compatible");
                report.push(
                    "transfer.peer_pair_is_intersection",
                    format!("{},i={i},i'={ip}", plan_tag(plan)),
                    ok,
                );
            }
        }
        report
    }

    /// `dim(ΣW_I) - dim(ΣW_I ∩ ΣW_J) <= a((d - b)beta1 + (r - a)beta2)` for
    /// `I ⊆ R`, `J` a set of helpers common to all of `I`.
    pub fn check_flow_bound(
        &self,
        plan: &RepairPlan,
        newcomers: &[usize],
        helpers: &[usize],
    ) -> Result<bool, SubspaceError> {
        let p = self.code.params();
        if let Some(i) = newcomers.iter().find(|i| !plan.failed().contains(i)) {
            return Err(SubspaceError::Precondition(format!(
                "{i} is not a failed node"
            )));
        }
        let common = plan.common_helpers(p, newcomers);
        if let Some(j) = helpers.iter().find(|j| !common.contains(j)) {
            return Err(SubspaceError::Precondition(format!(
                "{j} is not a common helper of I"
            )));
        }
        let wi = self.sum_nodes(newcomers);
        let wj = self.sum_nodes(helpers);
        let lhs = wi.rank() as i64 - wi.intersect(&wj)?.rank() as i64;
        let (a, b) = (newcomers.len() as i64, helpers.len() as i64);
        let (d, r) = (p.d() as i64, p.r() as i64);
        let rhs = a * ((d - b) * p.beta1() as i64 + (r - a) * p.beta2() as i64);
        Ok(lhs <= rhs)
    }

    /// Flow bound over every `I ⊆ R` and every `J` of common helpers.
    pub fn check_flow_bounds(&self, plan: &RepairPlan, exec: Execution) -> Report {
        let p = self.code.params();
        let mut cases = Vec::new();
        for i_set in subsets(plan.failed()) {
            let common = plan.common_helpers(p, &i_set);
            for j_set in subsets(&common) {
                cases.push((i_set.clone(), j_set));
            }
        }
        let results = exec.map(&cases, |(i_set, j_set)| {
            self.check_flow_bound(plan, i_set, j_set)
                .expect("enumerated sets meet the precondition")
        });
        let mut report = Report::default();
        for ((i_set, j_set), ok) in cases.into_iter().zip(results) {
            report.push(
                "flow.helper_bound",
                format!("{},I={},J={}", plan_tag(plan), join(&i_set), join(&j_set)),
                ok,
            );
        }
        report
    }

    /// All plan-dependent checks for one plan.
    pub fn check_plan(&self, plan: &RepairPlan, exec: Execution) -> Report {
        let ts = TransferSpaces::build(self.code, plan);
        let mut report = self.check_decomposition(plan, &ts);
        report.extend(self.check_transfer_dims(plan, &ts));
        report.extend(self.check_intersections(plan, &ts));
        report.extend(self.check_flow_bounds(plan, exec));
        report
    }

    /// Node and pair dimensions once, then every plan-dependent check for each plan.
    pub fn check_all(&self, plans: &[RepairPlan], exec: Execution) -> Report {
        let mut report = self.check_node_dims(exec);
        for plan in plans {
            report.extend(self.check_plan(plan, exec));
        }
        report
    }
}

/// All subsets of `items`, in order of increasing bitmask.
pub fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0u64..1 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

/// A repair in which a helper must compute rather than forward: the symbol it
/// transmits is not one of the symbols it stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferWitness {
    pub plan: RepairPlan,
    pub helper: usize,
    pub newcomer: usize,
    /// Evaluation point of the transmitted symbol.
    pub point: PointRef,
}

fn parallel_rows(field: &Field, a: &[u32], b: &[u32]) -> bool {
    let s = Subspace {
        field: *field,
        width: a.len(),
        rows: vec![a.to_vec(), b.to_vec()],
    };
    s.rank() < 2
}

/// Whether the symbol at `pt` is (up to a scalar) one of node `helper`'s
/// stored symbols.
pub fn is_stored_symbol(code: &Code, helper: usize, pt: PointRef) -> bool {
    let field = code.field();
    let row = point_row(code, pt);
    code.storage_pattern(helper)
        .into_iter()
        .any(|stored| parallel_rows(&field, &row, &point_row(code, stored)))
}

/// Search failed sets, newcomers and helpers in lexicographic order for a
/// phase-1 symbol the helper does not store.
pub fn find_transfer_witness(code: &Code) -> Option<TransferWitness> {
    let p = code.params();
    let nodes: Vec<usize> = (1..=p.n()).collect();
    for failed in subsets(&nodes).into_iter().filter(|s| s.len() == p.r()) {
        let survivors: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|x| !failed.contains(x))
            .collect();
        for &i in &failed {
            for &j in &survivors {
                let sent = [
                    PointRef {
                        x_node: j,
                        y_node: i,
                    },
                    PointRef {
                        x_node: i,
                        y_node: j,
                    },
                ];
                let Some(&point) = sent.iter().find(|&&pt| !is_stored_symbol(code, j, pt)) else {
                    continue;
                };
                let helpers = failed
                    .iter()
                    .map(|&f| {
                        let mut hs: Vec<usize> = Vec::with_capacity(p.d());
                        if f == i {
                            hs.push(j);
                        }
                        hs.extend(
                            survivors
                                .iter()
                                .copied()
                                .filter(|&s| !(f == i && s == j))
                                .take(p.d() - hs.len()),
                        );
                        (f, hs)
                    })
                    .collect();
                let plan = RepairPlan::new(p, &failed, HelperChoice::Explicit(helpers))
                    .expect("d + r <= n leaves enough survivors");
                return Some(TransferWitness {
                    plan,
                    helper: j,
                    newcomer: i,
                    point,
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::CodeParams;
    use proptest::prelude::*;

    fn gf(p: u32) -> Field {
        Field::prime(p).unwrap()
    }

    fn space(p: u32, rows: Vec<Vec<u32>>) -> Subspace {
        let w = rows.first().map_or(0, Vec::len);
        Subspace::new(gf(p), w, rows).unwrap()
    }

    // Every vector in the span, by enumerating all coefficient combinations.
    fn span_set(s: &Subspace) -> std::collections::BTreeSet<Vec<u32>> {
        let q = s.field.order() as usize;
        let f = s.field;
        let m = s.rows.len();
        let mut out = std::collections::BTreeSet::new();
        for idx in 0..q.pow(m as u32) {
            let mut v = vec![0u32; s.width];
            let mut rest = idx;
            for row in &s.rows {
                let c = (rest % q) as u32;
                rest /= q;
                for (o, &x) in v.iter_mut().zip(row) {
                    *o = f.add(*o, f.mul(c, x));
                }
            }
            out.insert(v);
        }
        out
    }

    fn log_q(size: usize, q: usize) -> usize {
        let mut d = 0;
        let mut s = 1;
        while s < size {
            s *= q;
            d += 1;
        }
        assert_eq!(s, size);
        d
    }

    #[test]
    fn rank_examples() {
        let id = space(7, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(id.rank(), 3);
        let dup = space(7, vec![vec![1, 2, 3], vec![1, 2, 3], vec![0, 1, 1]]);
        assert_eq!(dup.rank(), 2);
        assert_eq!(Subspace::zero(gf(7), 4).rank(), 0);
    }

    #[test]
    fn sum_and_intersect_examples() {
        let v = space(7, vec![vec![1, 2, 0, 1], vec![0, 1, 3, 3]]);
        assert_eq!(v.sum(&v).unwrap().rank(), 2);
        assert_eq!(v.sum(&Subspace::zero(gf(7), 4)).unwrap().rank(), 2);
        assert!(v.intersect(&v).unwrap().same_span(&v).unwrap());
        let other = Subspace::zero(gf(7), 3);
        assert_eq!(v.sum(&other), Err(SubspaceError::DimensionMismatch(4, 3)));
        assert!(v.intersect(&other).is_err());
        let x = space(7, vec![vec![1, 0, 0]]);
        let y = space(7, vec![vec![0, 1, 0]]);
        assert!(is_direct_sum(&[x.clone(), y]).unwrap());
        assert!(!is_direct_sum(&[x.clone(), x]).unwrap());
    }

    #[test]
    fn node_space_toy() {
        let code = Code::new(CodeParams::new(3, 1, 1, 1, gf(7)).unwrap());
        let w1 = node_space(&code, 1);
        // rows for (1,1) and (1,2) over columns a00, b01
        assert_eq!(w1.rows(), &[vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn sample_dimensions() {
        let code = Code::new(CodeParams::new(5, 2, 3, 2, gf(7)).unwrap());
        for i in 1..=5 {
            let w = node_space(&code, i);
            assert_eq!(w.rank(), 7);
            assert!(w.rows().iter().all(|r| r[0] == 1));
        }
        let cap = node_space(&code, 1)
            .intersect(&node_space(&code, 2))
            .unwrap();
        assert_eq!(cap.rank(), 2);
    }

    #[test]
    fn sample_all_checks_pass() {
        let code = Code::new(CodeParams::new(5, 2, 3, 2, gf(7)).unwrap());
        let model = SpaceModel::new(&code);
        let plan = RepairPlan::new(code.params(), &[1, 2], HelperChoice::Seeded(1)).unwrap();
        let report = model.check_all(std::slice::from_ref(&plan), Execution::default());
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.count("node.dim"), 5);
        assert_eq!(report.count("pair.intersection_dim"), 10);
        assert_eq!(report.count("newcomer.direct_sum"), 2);
        assert_eq!(report.count("transfer.helper_dim"), 6);
        assert_eq!(report.count("transfer.peer_dim"), 2);
        assert_eq!(report.count("transfer.peer_pair_is_intersection"), 1);
        // I ⊆ {1,2}: 4 choices, common helpers always {3,4,5}
        assert_eq!(report.count("flow.helper_bound"), 4 * 8);
        assert!(model.check_flow_bound(&plan, &[1, 2], &[]).unwrap());
        assert!(model.check_flow_bound(&plan, &[], &[]).unwrap());
    }

    #[test]
    fn toy_checks_pass_with_vacuous_t() {
        let code = Code::new(CodeParams::new(3, 1, 1, 1, gf(7)).unwrap());
        let model = SpaceModel::new(&code);
        let plan = RepairPlan::new(code.params(), &[2], HelperChoice::Seeded(1)).unwrap();
        let report = model.check_all(&[plan], Execution::Sequential);
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.count("transfer.peer_dim"), 0);
        assert_eq!(report.count("transfer.peer_pair_is_intersection"), 0);
    }

    #[test]
    fn fault_injection_fails() {
        let code = Code::new(CodeParams::new(5, 2, 3, 2, gf(7)).unwrap());
        let model = SpaceModel::with_fault(&code, 1);
        let plan = RepairPlan::new(code.params(), &[1, 2], HelperChoice::Seeded(1)).unwrap();
        let report = model.check_all(&[plan], Execution::Sequential);
        assert!(!report.all_passed());
        assert!(report
            .failures()
            .any(|e| e.name == "node.dim" && e.indices == "i=1"));
        assert!(report.to_string().contains("CHECK node.dim i=1 FAIL"));
    }

    #[test]
    fn flow_bound_precondition() {
        let code = Code::new(CodeParams::new(7, 2, 3, 2, gf(7)).unwrap());
        let model = SpaceModel::new(&code);
        let mut map = BTreeMap::new();
        map.insert(1, vec![3, 4, 5]);
        map.insert(2, vec![4, 5, 6]);
        let plan = RepairPlan::new(code.params(), &[1, 2], HelperChoice::Explicit(map)).unwrap();
        assert!(matches!(
            model.check_flow_bound(&plan, &[3], &[]),
            Err(SubspaceError::Precondition(_))
        ));
        assert!(matches!(
            model.check_flow_bound(&plan, &[1, 2], &[3]),
            Err(SubspaceError::Precondition(_))
        ));
        assert!(model.check_flow_bound(&plan, &[1, 2], &[4, 5]).unwrap());
        assert!(model.check_flow_bound(&plan, &[1], &[3]).unwrap());
    }

    #[test]
    fn witness_found_when_d_at_least_two() {
        let code = Code::new(CodeParams::new(5, 2, 3, 2, gf(7)).unwrap());
        let w = find_transfer_witness(&code).unwrap();
        assert!(w.plan.helpers(w.newcomer).contains(&w.helper));
        assert!(!is_stored_symbol(&code, w.helper, w.point));
    }

    #[test]
    fn no_witness_when_every_node_stores_everything() {
        // d = 1, n = d + r: each node holds the whole file
        let code = Code::new(CodeParams::new(3, 1, 1, 2, gf(3)).unwrap());
        assert_eq!(node_space(&code, 1).rank(), code.params().file_size());
        assert!(find_transfer_witness(&code).is_none());
        // one spare node is enough
        let code = Code::new(CodeParams::new(4, 1, 1, 2, gf(5)).unwrap());
        assert!(find_transfer_witness(&code).is_some());
    }

    #[test]
    fn node_rows_reproduce_shares() {
        use crate::codec::DataBlock;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for (n, k, d, r, q) in [(5, 2, 3, 2, 7), (6, 3, 4, 2, 7), (4, 1, 2, 1, 5)] {
            let code = Code::new(CodeParams::new(n, k, d, r, gf(q)).unwrap());
            let f = code.field();
            let u: Vec<u32> = (0..code.params().file_size())
                .map(|_| rng.gen_range(0..q))
                .collect();
            let shares = code.encode(&DataBlock::new(u.clone())).unwrap();
            for share in &shares {
                let w = node_space(&code, share.node_id);
                let via_rows: Vec<u32> = w
                    .rows()
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(&u)
                            .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
                    })
                    .collect();
                assert_eq!(via_rows, share.evals);
            }
        }
    }

    #[test]
    fn random_rank_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let rows: Vec<Vec<u32>> = (0..5)
                .map(|_| (0..8).map(|_| rng.gen_range(0..3)).collect())
                .collect();
            let s = Subspace::new(gf(3), 8, rows).unwrap();
            assert_eq!(s.rank(), log_q(span_set(&s).len(), 3));
        }
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<Vec<u32>>, Vec<Vec<u32>>, u32)> {
        (
            prop::sample::select(vec![2u32, 3, 5]),
            1usize..=4,
            0usize..=3,
            0usize..=3,
        )
            .prop_flat_map(|(q, width, ra, rb)| {
                let row = proptest::collection::vec(0..q, width);
                (
                    proptest::collection::vec(row.clone(), ra),
                    proptest::collection::vec(row, rb),
                    Just(q),
                )
            })
    }

    proptest! {
        #[test]
        fn sum_and_intersection_match_enumeration((a, b, q) in arb_pair()) {
            let width = a.first().or(b.first()).map_or(1, Vec::len);
            let a = Subspace::new(gf(q), width, a).unwrap();
            let b = Subspace::new(gf(q), width, b).unwrap();
            let sa = span_set(&a);
            let sb = span_set(&b);
            let cap = a.intersect(&b).unwrap();
            let brute: std::collections::BTreeSet<_> = sa.intersection(&sb).cloned().collect();
            prop_assert_eq!(span_set(&cap), brute);
            let sum = a.sum(&b).unwrap();
            prop_assert_eq!(sum.rank() + cap.rank(), a.rank() + b.rank());
            prop_assert_eq!(sum.rank(), log_q(span_set(&sum).len(), q as usize));
            prop_assert!(a.contains(&cap).unwrap() && b.contains(&cap).unwrap());
        }
    }
}
