//! Univariate and bivariate polynomials over GF(q).
//!
//! The bivariate polynomial carries the data of one stripe:
//!
//! ```text
//! F(X,Y) = sum_{i<k, j<k}      a_ij X^i Y^j
//!        + sum_{i<k, k<=j<d+r} b_ij X^i Y^j
//!        + sum_{k<=i<d, j<k}   c_ij X^i Y^j
//! ```
//!
//! Coefficients are stored in the canonical order: the `a` block row-major by
//! `(i, j)`, then the `b` block, then the `c` block.

use thiserror::Error;

use crate::gf::Field;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("interpolation needs exactly {expected} points, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("duplicate abscissa {0} in interpolation points")]
    DuplicateAbscissa(u32),
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
}

/// A univariate polynomial with ascending coefficients. The coefficient count
/// is the degree bound; trailing zeros are kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<u32>,
}

impl UniPoly {
    pub fn new(coeffs: Vec<u32>) -> Self {
        Self { coeffs }
    }

    pub fn zero(degree_bound: usize) -> Self {
        Self {
            coeffs: vec![0; degree_bound],
        }
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of the `j`-th power, zero past the degree bound.
    pub fn coeff(&self, j: usize) -> u32 {
        self.coeffs.get(j).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Horner evaluation.
    pub fn eval(&self, field: &Field, x: u32) -> u32 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| field.add(field.mul(acc, x), c))
    }
}

/// The unique polynomial of degree `< degree_bound` through `points`.
///
/// Exactly `degree_bound` points with pairwise distinct abscissae are required.
pub fn interpolate(
    field: &Field,
    points: &[(u32, u32)],
    degree_bound: usize,
) -> Result<UniPoly, PolyError> {
    if points.len() != degree_bound {
        return Err(PolyError::Arity {
            expected: degree_bound,
            got: points.len(),
        });
    }
    for (t, &(x, _)) in points.iter().enumerate() {
        if points[..t].iter().any(|&(xs, _)| xs == x) {
            return Err(PolyError::DuplicateAbscissa(x));
        }
    }
    let m = degree_bound;

    // master(X) = prod_t (X - x_t), ascending, degree m
    let mut master = vec![0u32; m + 1];
    master[0] = 1;
    for (t, &(x, _)) in points.iter().enumerate() {
        let neg_x = field.neg(x);
        for e in (0..=t + 1).rev() {
            let shifted = if e > 0 { master[e - 1] } else { 0 };
            master[e] = field.add(shifted, field.mul(master[e], neg_x));
        }
    }

    let mut out = vec![0u32; m];
    let mut quotient = vec![0u32; m];
    for &(x, y) in points {
        if y == 0 {
            continue;
        }
        // master / (X - x) by synthetic division
        let mut carry = 0;
        for e in (0..m).rev() {
            carry = field.add(master[e + 1], field.mul(carry, x));
            quotient[e] = carry;
        }
        let denom = quotient
            .iter()
            .rev()
            .fold(0, |acc, &c| field.add(field.mul(acc, x), c));
        let scale = field
            .div(y, denom)
            .expect("distinct abscissae give a nonzero Lagrange denominator");
        for (o, &q) in out.iter_mut().zip(&quotient) {
            *o = field.add(*o, field.mul(scale, q));
        }
    }
    Ok(UniPoly::new(out))
}

/// Shape of the coefficient grid of `F(X,Y)` for given `(k, d, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoefficientLayout {
    k: usize,
    d: usize,
    r: usize,
}

impl CoefficientLayout {
    pub fn new(k: usize, d: usize, r: usize) -> Self {
        debug_assert!(k >= 1 && k <= d && r >= 1);
        Self { k, d, r }
    }

    /// Total number of coefficients, `k(2d + r - k)`.
    pub fn len(&self) -> usize {
        self.k * (2 * self.d + self.r - self.k)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// X-degree is strictly below this.
    pub fn x_degree_bound(&self) -> usize {
        self.d
    }

    /// Y-degree is strictly below this.
    pub fn y_degree_bound(&self) -> usize {
        self.d + self.r
    }

    fn b_width(&self) -> usize {
        self.d + self.r - self.k
    }

    /// Exponent pairs `(i, j)` in canonical order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (k, d, r) = (self.k, self.d, self.r);
        let a = (0..k).flat_map(move |i| (0..k).map(move |j| (i, j)));
        let b = (0..k).flat_map(move |i| (k..d + r).map(move |j| (i, j)));
        let c = (k..d).flat_map(move |i| (0..k).map(move |j| (i, j)));
        a.chain(b).chain(c)
    }

    /// Canonical position of `X^i Y^j`, or `None` for cells outside the grid.
    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        let k = self.k;
        if i < k && j < k {
            Some(i * k + j)
        } else if i < k && j < self.d + self.r {
            Some(k * k + i * self.b_width() + (j - k))
        } else if i >= k && i < self.d && j < k {
            Some(k * k + k * self.b_width() + (i - k) * k + j)
        } else {
            None
        }
    }
}

/// `F(X,Y)` with coefficients in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BiPoly {
    layout: CoefficientLayout,
    coeffs: Vec<u32>,
}

impl BiPoly {
    pub fn new(layout: CoefficientLayout, coeffs: Vec<u32>) -> Result<Self, PolyError> {
        if coeffs.len() != layout.len() {
            return Err(PolyError::CoefficientCount {
                expected: layout.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { layout, coeffs })
    }

    pub fn zero(layout: CoefficientLayout) -> Self {
        Self {
            layout,
            coeffs: vec![0; layout.len()],
        }
    }

    pub fn layout(&self) -> CoefficientLayout {
        self.layout
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u32> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> Option<u32> {
        self.layout.index_of(i, j).map(|idx| self.coeffs[idx])
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, value: u32) -> bool {
        match self.layout.index_of(i, j) {
            Some(idx) => {
                self.coeffs[idx] = value;
                true
            }
            None => false,
        }
    }

    pub fn eval(&self, field: &Field, x: u32, y: u32) -> u32 {
        let xp = powers(field, x, self.layout.x_degree_bound());
        let yp = powers(field, y, self.layout.y_degree_bound());
        self.layout
            .cells()
            .zip(&self.coeffs)
            .fold(0, |acc, ((i, j), &c)| {
                field.add(acc, field.mul(c, field.mul(xp[i], yp[j])))
            })
    }

    /// `F(x0, Y)` as a polynomial in Y of degree `< d + r`.
    pub fn restrict_x(&self, field: &Field, x0: u32) -> UniPoly {
        let xp = powers(field, x0, self.layout.x_degree_bound());
        let mut out = vec![0; self.layout.y_degree_bound()];
        for ((i, j), &c) in self.layout.cells().zip(&self.coeffs) {
            out[j] = field.add(out[j], field.mul(c, xp[i]));
        }
        UniPoly::new(out)
    }

    /// `F(X, y0)` as a polynomial in X of degree `< d`.
    pub fn restrict_y(&self, field: &Field, y0: u32) -> UniPoly {
        let yp = powers(field, y0, self.layout.y_degree_bound());
        let mut out = vec![0; self.layout.x_degree_bound()];
        for ((i, j), &c) in self.layout.cells().zip(&self.coeffs) {
            out[i] = field.add(out[i], field.mul(c, yp[j]));
        }
        UniPoly::new(out)
    }
}

/// `[1, x, x^2, ..., x^(count-1)]`
pub fn powers(field: &Field, x: u32, count: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(count);
    let mut acc = 1;
    for _ in 0..count {
        out.push(acc);
        acc = field.mul(acc, x);
    }
    out
}
