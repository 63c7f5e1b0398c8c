//! Exact cooperative regenerating codes at the minimum-bandwidth point.
//!
//! Data of `B = k(2d + r - k)` symbols is written as the coefficients of a
//! bivariate polynomial `F(X,Y)`; each of `n` nodes stores `alpha = 2d + r - 1`
//! evaluations of it. Any `k` nodes reconstruct the data by staged
//! interpolation, and any `r` failed nodes are rebuilt bit-exactly by a
//! two-phase cooperative repair that downloads exactly `alpha` symbols per
//! newcomer.
//!
//! - [`gf`]: GF(p) and GF(2^8) arithmetic.
//! - [`poly`]: univariate and bivariate polynomials, Lagrange interpolation.
//! - [`codec`]: parameters, encoding, reconstruction.
//! - [`repair`]: cooperative repair and bandwidth accounting.
//! - [`subspace`]: rank, sum and intersection over GF(q); node subspace checks.
//! - [`bounds`]: the cut-set bound and the MBCR/MSCR tradeoff points.
//! - [`cli`]: striping, the share file format, and the command drivers.

pub mod bounds;
pub mod cli;
pub mod codec;
pub mod gf;
pub mod par;
pub mod poly;
pub mod repair;
pub mod subspace;

pub use codec::{Code, CodeParams, CodecError, DataBlock, EvalPoints, Share, SharePolys};
pub use gf::{Field, FieldElement, FieldKind, GfError};
pub use par::Execution;
pub use repair::{BandwidthLedger, HelperChoice, RepairError, RepairOutcome, RepairPlan};
