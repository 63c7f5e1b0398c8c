//! Code parameters, the encoder, and data reconstruction.
//!
//! Node `i` (1-based) stores `alpha = 2d + r - 1` evaluations of `F(X,Y)`:
//!
//! ```text
//! F(x_i, y_{i+0}), ..., F(x_i, y_{i+(d+r-1)}), F(x_{i+1}, y_i), ..., F(x_{i+(d-1)}, y_i)
//! ```
//!
//! with node indices taken cyclically in `[1, n]`. The first `d + r` values
//! pin down `f_i(Y) = F(x_i, Y)` and the first value with the last `d - 1`
//! pin down `g_i(X) = F(X, y_i)`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::gf::{Field, GfError};
use crate::poly::{interpolate, powers, BiPoly, CoefficientLayout, PolyError, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("parameter {name} = {value} must be at least 1")]
    Range { name: &'static str, value: usize },
    #[error("d + r = {} exceeds n = {n}", d + r)]
    Topology { n: usize, d: usize, r: usize },
    #[error(
        "k = {k} exceeds d = {d}: an (n, k, d, r) code with k > d is equivalent to an \
         (n, d, d, r) code, re-run with k = d"
    )]
    KExceedsD { k: usize, d: usize },
    #[error("{field} has {order} elements, fewer than n = {n}")]
    FieldTooSmall { field: Field, order: u32, n: usize },
    #[error("parameter {name} = {value} does not fit the supported range")]
    TooLarge { name: &'static str, value: usize },
    #[error("evaluation points must be {n} pairwise distinct field elements per axis")]
    BadPoints { n: usize },
    #[error("data block has {got} symbols, expected B = {expected}")]
    DataLength { expected: usize, got: usize },
    #[error("symbol {value} is not an element of {field}")]
    SymbolRange { value: u32, field: Field },
    #[error("share of node {node} has {got} symbols, expected alpha = {expected}")]
    ShareLength {
        node: usize,
        expected: usize,
        got: usize,
    },
    #[error("node id {id} outside [1, {n}]")]
    NodeId { id: usize, n: usize },
    #[error("duplicate node id {0}")]
    DuplicateNode(usize),
    #[error("reconstruction needs exactly k = {expected} shares, got {got}")]
    ShareCount { expected: usize, got: usize },
    #[error("share of node {0} failed its consistency check")]
    CorruptShare(usize),
    #[error("share of node {0} is inconsistent with the other shares")]
    Corruption(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Validated `(n, k, d, r)` over a field, with the scalar MBCR quantities
/// `beta2 = 1`, `beta1 = 2`, `alpha = gamma = 2d + r - 1`, `B = k(2d + r - k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    n: usize,
    k: usize,
    d: usize,
    r: usize,
    field: Field,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, d: usize, r: usize, field: Field) -> Result<Self, CodecError> {
        for (name, value) in [("n", n), ("k", k), ("d", d), ("r", r)] {
            if value < 1 {
                return Err(CodecError::Range { name, value });
            }
            if value > u16::MAX as usize {
                return Err(CodecError::TooLarge { name, value });
            }
        }
        if d + r > n {
            return Err(CodecError::Topology { n, d, r });
        }
        if k > d {
            return Err(CodecError::KExceedsD { k, d });
        }
        if (field.order() as usize) < n {
            return Err(CodecError::FieldTooSmall {
                field,
                order: field.order(),
                n,
            });
        }
        Ok(Self { n, k, d, r, field })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Symbols per node.
    pub fn alpha(&self) -> usize {
        2 * self.d + self.r - 1
    }

    /// Symbols each helper sends to each newcomer.
    pub fn beta1(&self) -> usize {
        2
    }

    /// Symbols each newcomer sends to each other newcomer.
    pub fn beta2(&self) -> usize {
        1
    }

    /// Data symbols per stripe, B.
    pub fn file_size(&self) -> usize {
        self.k * (2 * self.d + self.r - self.k)
    }

    /// Symbols downloaded by one newcomer, `d*beta1 + (r-1)*beta2`.
    pub fn gamma(&self) -> usize {
        self.d * self.beta1() + (self.r - 1) * self.beta2()
    }

    pub fn layout(&self) -> CoefficientLayout {
        CoefficientLayout::new(self.k, self.d, self.r)
    }

    /// `i (+) t`: cyclic successor of node `i` in `[1, n]`.
    pub fn node_offset(&self, i: usize, t: usize) -> usize {
        (i - 1 + t) % self.n + 1
    }
}

/// The `x_i` and `y_i` abscissae, indexed by 1-based node id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvalPoints {
    x: Vec<u32>,
    y: Vec<u32>,
}

fn all_distinct(values: &[u32]) -> bool {
    let set: BTreeSet<_> = values.iter().collect();
    set.len() == values.len()
}

impl EvalPoints {
    pub fn new(field: &Field, x: Vec<u32>, y: Vec<u32>) -> Result<Self, CodecError> {
        let n = x.len();
        if y.len() != n
            || !all_distinct(&x)
            || !all_distinct(&y)
            || x.iter().chain(&y).any(|&v| !field.contains(v))
        {
            return Err(CodecError::BadPoints { n });
        }
        Ok(Self { x, y })
    }

    /// `x_i = y_i = element_at(i mod q)` for `i = 1..=n`.
    ///
    /// This is the element with index `i` whenever `n < q`; when `n = q` the
    /// last node takes the zero element so that every field of order at
    /// least `n` works.
    pub fn derive(params: &CodeParams) -> Self {
        let field = params.field();
        let q = field.order() as u64;
        let x: Vec<u32> = (1..=params.n() as u64)
            .map(|i| {
                field
                    .element_at(i % q)
                    .expect("index reduced below the field order")
                    .value()
            })
            .collect();
        Self { y: x.clone(), x }
    }

    pub fn x(&self, node: usize) -> u32 {
        self.x[node - 1]
    }

    pub fn y(&self, node: usize) -> u32 {
        self.y[node - 1]
    }

    pub fn xs(&self) -> &[u32] {
        &self.x
    }

    pub fn ys(&self) -> &[u32] {
        &self.y
    }
}

/// One stripe of data: the B coefficients of `F(X,Y)` in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DataBlock {
    symbols: Vec<u32>,
}

impl DataBlock {
    pub fn new(symbols: Vec<u32>) -> Self {
        Self { symbols }
    }

    pub fn zero(params: &CodeParams) -> Self {
        Self {
            symbols: vec![0; params.file_size()],
        }
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<u32> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// The `alpha` evaluations held by one node, in canonical layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Share {
    pub node_id: usize,
    pub evals: Vec<u32>,
}

impl Share {
    pub fn new(node_id: usize, evals: Vec<u32>) -> Self {
        Self { node_id, evals }
    }
}

/// A node's content viewed as its two restriction polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharePolys {
    /// `f_i(Y) = F(x_i, Y)`, degree `< d + r`.
    pub f: UniPoly,
    /// `g_i(X) = F(X, y_i)`, degree `< d`.
    pub g: UniPoly,
}

/// Evaluation point of one stored symbol, as node indices into `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointRef {
    pub x_node: usize,
    pub y_node: usize,
}

/// A code instance: parameters plus fixed evaluation points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    params: CodeParams,
    points: EvalPoints,
}

impl Code {
    pub fn new(params: CodeParams) -> Self {
        let points = EvalPoints::derive(&params);
        Self { params, points }
    }

    pub fn with_points(params: CodeParams, points: EvalPoints) -> Result<Self, CodecError> {
        if points.xs().len() != params.n() {
            return Err(CodecError::BadPoints { n: params.n() });
        }
        Ok(Self { params, points })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn points(&self) -> &EvalPoints {
        &self.points
    }

    pub fn field(&self) -> Field {
        self.params.field()
    }

    pub fn check_node(&self, id: usize) -> Result<(), CodecError> {
        if id < 1 || id > self.params.n() {
            return Err(CodecError::NodeId {
                id,
                n: self.params.n(),
            });
        }
        Ok(())
    }

    /// Where each of node `i`'s stored symbols is evaluated, in share order.
    pub fn storage_pattern(&self, i: usize) -> Vec<PointRef> {
        let p = &self.params;
        let row = (0..p.d() + p.r()).map(|t| PointRef {
            x_node: i,
            y_node: p.node_offset(i, t),
        });
        let col = (1..p.d()).map(|t| PointRef {
            x_node: p.node_offset(i, t),
            y_node: i,
        });
        row.chain(col).collect()
    }

    pub fn data_to_poly(&self, data: &DataBlock) -> Result<BiPoly, CodecError> {
        let expected = self.params.file_size();
        if data.len() != expected {
            return Err(CodecError::DataLength {
                expected,
                got: data.len(),
            });
        }
        let field = self.field();
        if let Some(&value) = data.symbols().iter().find(|&&v| !field.contains(v)) {
            return Err(CodecError::SymbolRange { value, field });
        }
        Ok(BiPoly::new(self.params.layout(), data.symbols().to_vec())?)
    }

    /// Share of node `i` for the polynomial `poly`.
    pub fn encode_node(&self, poly: &BiPoly, i: usize) -> Share {
        let field = self.field();
        let (xi, yi) = (self.points.x(i), self.points.y(i));
        let f = poly.restrict_x(&field, xi);
        let g = poly.restrict_y(&field, yi);
        Share::new(i, self.evaluate_pattern(i, &f, &g))
    }

    /// Lay out node `i`'s share from its restriction polynomials.
    pub fn share_from_polys(&self, i: usize, polys: &SharePolys) -> Share {
        Share::new(i, self.evaluate_pattern(i, &polys.f, &polys.g))
    }

    fn evaluate_pattern(&self, i: usize, f: &UniPoly, g: &UniPoly) -> Vec<u32> {
        let field = self.field();
        self.storage_pattern(i)
            .into_iter()
            .map(|pt| {
                if pt.x_node == i {
                    f.eval(&field, self.points.y(pt.y_node))
                } else {
                    g.eval(&field, self.points.x(pt.x_node))
                }
            })
            .collect()
    }

    /// All `n` shares of `data`, node 1 first.
    pub fn encode(&self, data: &DataBlock) -> Result<Vec<Share>, CodecError> {
        let poly = self.data_to_poly(data)?;
        Ok((1..=self.params.n())
            .map(|i| self.encode_node(&poly, i))
            .collect())
    }

    fn check_share(&self, share: &Share) -> Result<(), CodecError> {
        self.check_node(share.node_id)?;
        let expected = self.params.alpha();
        if share.evals.len() != expected {
            return Err(CodecError::ShareLength {
                node: share.node_id,
                expected,
                got: share.evals.len(),
            });
        }
        let field = self.field();
        if let Some(&value) = share.evals.iter().find(|&&v| !field.contains(v)) {
            return Err(CodecError::SymbolRange { value, field });
        }
        Ok(())
    }

    /// Recover `(f_i, g_i)` from a share's evaluations.
    pub fn share_polys(&self, share: &Share) -> Result<SharePolys, CodecError> {
        self.check_share(share)?;
        let p = &self.params;
        let field = self.field();
        let i = share.node_id;
        let dr = p.d() + p.r();

        let f_points: Vec<(u32, u32)> = (0..dr)
            .map(|t| (self.points.y(p.node_offset(i, t)), share.evals[t]))
            .collect();
        let f = interpolate(&field, &f_points, dr)?;

        let mut g_points = Vec::with_capacity(p.d());
        g_points.push((self.points.x(i), share.evals[0]));
        g_points.extend(
            (1..p.d()).map(|t| (self.points.x(p.node_offset(i, t)), share.evals[dr - 1 + t])),
        );
        let g = interpolate(&field, &g_points, p.d())?;

        let (xi, yi) = (self.points.x(i), self.points.y(i));
        if f.eval(&field, yi) != share.evals[0]
            || g.eval(&field, xi) != share.evals[0]
            || self.evaluate_pattern(i, &f, &g) != share.evals
        {
            return Err(CodecError::CorruptShare(i));
        }
        Ok(SharePolys { f, g })
    }

    /// Recover the data from exactly `k` shares with distinct node ids.
    ///
    /// The `b` coefficients come from the high Y-coefficients of the `f`s, the
    /// `c` coefficients from the high X-coefficients of the `g`s, and the `a`
    /// block from the low Y-coefficients once the `c` terms are removed. The
    /// result is re-encoded and checked against every input share.
    pub fn reconstruct(&self, shares: &[Share]) -> Result<DataBlock, CodecError> {
        let p = &self.params;
        let (k, d, r) = (p.k(), p.d(), p.r());
        if shares.len() != k {
            return Err(CodecError::ShareCount {
                expected: k,
                got: shares.len(),
            });
        }
        let mut ids = BTreeSet::new();
        for s in shares {
            self.check_node(s.node_id)?;
            if !ids.insert(s.node_id) {
                return Err(CodecError::DuplicateNode(s.node_id));
            }
        }
        let field = self.field();
        let polys = shares
            .iter()
            .map(|s| self.share_polys(s))
            .collect::<Result<Vec<_>, _>>()?;
        let xs: Vec<u32> = shares.iter().map(|s| self.points.x(s.node_id)).collect();
        let ys: Vec<u32> = shares.iter().map(|s| self.points.y(s.node_id)).collect();

        let mut out = BiPoly::zero(p.layout());

        // b_ij: the Y^j coefficient of f_l is B_j(x_l) for j >= k
        for j in k..d + r {
            let pts: Vec<_> = xs
                .iter()
                .zip(&polys)
                .map(|(&x, sp)| (x, sp.f.coeff(j)))
                .collect();
            let bj = interpolate(&field, &pts, k)?;
            for i in 0..k {
                out.set_coeff(i, j, bj.coeff(i));
            }
        }
        // c_ij: the X^i coefficient of g_l is C_i(y_l) for i >= k
        for i in k..d {
            let pts: Vec<_> = ys
                .iter()
                .zip(&polys)
                .map(|(&y, sp)| (y, sp.g.coeff(i)))
                .collect();
            let ci = interpolate(&field, &pts, k)?;
            for j in 0..k {
                out.set_coeff(i, j, ci.coeff(j));
            }
        }
        // a_ij: Y^j coefficient of f_l minus the c contribution is A_j(x_l)
        let xpows: Vec<Vec<u32>> = xs.iter().map(|&x| powers(&field, x, d)).collect();
        for j in 0..k {
            let pts: Vec<_> = xs
                .iter()
                .zip(&polys)
                .zip(&xpows)
                .map(|((&x, sp), xp)| {
                    let c_part = (k..d).fold(0, |acc, i| {
                        let c = out.coeff(i, j).expect("c cell inside layout");
                        field.add(acc, field.mul(c, xp[i]))
                    });
                    (x, field.sub(sp.f.coeff(j), c_part))
                })
                .collect();
            let aj = interpolate(&field, &pts, k)?;
            for i in 0..k {
                out.set_coeff(i, j, aj.coeff(i));
            }
        }

        for s in shares {
            if self.encode_node(&out, s.node_id).evals != s.evals {
                return Err(CodecError::Corruption(s.node_id));
            }
        }
        Ok(DataBlock::new(out.into_coeffs()))
    }
}
