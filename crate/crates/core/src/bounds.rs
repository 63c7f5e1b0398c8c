//! Cut-set bound for cooperative regenerating codes, in exact rationals.
//!
//! A data collector reading `k` nodes that were regenerated in groups of
//! sizes `l_1, ..., l_s` (each at most `r`) sees at most
//! `Σ_h l_h · min{α, (d − Σ_{t<h} l_t)β1 + (r − l_h)β2}` symbols, so the file
//! size `B` can be no larger than the minimum of that sum over all groupings.

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;

pub type Rational = Ratio<i64>;

/// Storage and bandwidth parameters of one point on the tradeoff curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub alpha: Rational,
    pub beta1: Rational,
    pub beta2: Rational,
    pub gamma: Rational,
    pub file_size: Rational,
}

impl fmt::Display for TradeoffPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={} beta1={} beta2={} gamma={} B={}",
            self.alpha, self.beta1, self.beta2, self.gamma, self.file_size
        )
    }
}

/// Ordered composition of `k` into parts in `[1, r]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition(pub Vec<usize>);

impl Composition {
    pub fn parts(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All compositions of `k` with parts in `[1, r]`, largest first part first.
pub fn enumerate_compositions(k: usize, r: usize) -> Vec<Composition> {
    fn go(rest: usize, r: usize, prefix: &mut Vec<usize>, out: &mut Vec<Composition>) {
        if rest == 0 {
            out.push(Composition(prefix.clone()));
            return;
        }
        for part in (1..=r.min(rest)).rev() {
            prefix.push(part);
            go(rest - part, r, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k >= 1 && r >= 1 {
        go(k, r, &mut Vec::new(), &mut out);
    }
    out
}

fn int(v: usize) -> Rational {
    Rational::from_integer(v as i64)
}

/// Right-hand side of the cut-set inequality for one composition.
pub fn cutset_rhs(d: usize, r: usize, point: &TradeoffPoint, c: &Composition) -> Rational {
    let mut seen = 0usize;
    let mut total = Rational::zero();
    for &l in c.parts() {
        let flow = (int(d) - int(seen)) * point.beta1 + (int(r) - int(l)) * point.beta2;
        total += int(l) * point.alpha.min(flow);
        seen += l;
    }
    total
}

/// Tightest upper bound on `B` at `point`: the minimum over compositions.
pub fn max_file_size(k: usize, d: usize, r: usize, point: &TradeoffPoint) -> Rational {
    enumerate_compositions(k, r)
        .iter()
        .map(|c| cutset_rhs(d, r, point, c))
        .min()
        .unwrap_or_else(Rational::zero)
}

/// Minimum-bandwidth point for file size `b`.
pub fn mbcr_point(k: usize, d: usize, r: usize, b: Rational) -> TradeoffPoint {
    let beta2 = b / int(k * (2 * d + r - k));
    let beta1 = beta2 * 2;
    let gamma = int(d) * beta1 + int(r - 1) * beta2;
    TradeoffPoint {
        alpha: gamma,
        beta1,
        beta2,
        gamma,
        file_size: b,
    }
}

/// Minimum-storage point for file size `b`.
pub fn mscr_point(k: usize, d: usize, r: usize, b: Rational) -> TradeoffPoint {
    let beta = b / int(k * (d - k + r));
    TradeoffPoint {
        alpha: b / int(k),
        beta1: beta,
        beta2: beta,
        gamma: int(d) * beta + int(r - 1) * beta,
        file_size: b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn comps(k: usize, r: usize) -> Vec<Vec<usize>> {
        enumerate_compositions(k, r)
            .into_iter()
            .map(|c| c.0)
            .collect()
    }

    // every vector in [1, r]^len for len = 1..=k, keeping those summing to k
    fn brute_compositions(k: usize, r: usize) -> std::collections::BTreeSet<Vec<usize>> {
        let mut out = std::collections::BTreeSet::new();
        for len in 1..=k {
            let total = r.pow(len as u32);
            for idx in 0..total {
                let mut rest = idx;
                let v: Vec<usize> = (0..len)
                    .map(|_| {
                        let p = rest % r + 1;
                        rest /= r;
                        p
                    })
                    .collect();
                if v.iter().sum::<usize>() == k {
                    out.insert(v);
                }
            }
        }
        out
    }

    #[test]
    fn composition_examples() {
        assert_eq!(comps(2, 2), vec![vec![2], vec![1, 1]]);
        assert_eq!(comps(1, 5), vec![vec![1]]);
        assert_eq!(
            comps(4, 2),
            vec![
                vec![2, 2],
                vec![2, 1, 1],
                vec![1, 2, 1],
                vec![1, 1, 2],
                vec![1, 1, 1, 1]
            ]
        );
        assert!(comps(0, 2).is_empty());
        assert_eq!(Composition(vec![2, 1]).to_string(), "(2,1)");
    }

    #[test]
    fn compositions_match_brute_force() {
        for k in 1..=6 {
            for r in 1..=5 {
                let got: std::collections::BTreeSet<_> = comps(k, r).into_iter().collect();
                assert_eq!(got.len(), comps(k, r).len());
                assert_eq!(got, brute_compositions(k, r), "k={k} r={r}");
            }
        }
    }

    #[test]
    fn cutset_examples() {
        let p = mbcr_point(2, 3, 2, int(12));
        assert_eq!(cutset_rhs(3, 2, &p, &Composition(vec![2])), int(12));
        assert_eq!(cutset_rhs(3, 2, &p, &Composition(vec![1, 1])), int(12));
        assert_eq!(max_file_size(2, 3, 2, &p), int(12));
        let p = mbcr_point(1, 4, 2, int(9));
        assert_eq!(cutset_rhs(4, 2, &p, &Composition(vec![1])), p.alpha);
        assert_eq!(max_file_size(1, 4, 2, &p), int(9));
    }

    #[test]
    fn point_examples() {
        let m = mbcr_point(2, 3, 2, int(12));
        assert_eq!(
            (m.beta2, m.beta1, m.alpha, m.gamma),
            (int(1), int(2), int(7), int(7))
        );
        let s = mscr_point(2, 3, 2, int(12));
        assert_eq!((s.alpha, s.beta1, s.beta2), (int(6), int(2), int(2)));
        let s = mscr_point(2, 3, 2, int(1));
        assert_eq!(s.beta1, Rational::new(1, 6));
    }

    #[test]
    fn mbcr_bound_met_with_equality_on_grid() {
        for n in 2..=8usize {
            for r in 1..n {
                for d in 1..=n - r {
                    for k in 1..=d {
                        let b = int(k * (2 * d + r - k));
                        let p = mbcr_point(k, d, r, b);
                        assert_eq!(max_file_size(k, d, r, &p), b, "({n},{k},{d},{r})");
                        for c in enumerate_compositions(k, r) {
                            assert!(cutset_rhs(d, r, &p, &c) >= b);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn scaling_is_linear(k in 1usize..5, extra in 0usize..4, r in 1usize..4, b in 1i64..500) {
            let d = k + extra;
            let base = Rational::from_integer(b);
            let two = Rational::from_integer(2);
            for (p, q) in [
                (mbcr_point(k, d, r, base), mbcr_point(k, d, r, base * two)),
                (mscr_point(k, d, r, base), mscr_point(k, d, r, base * two)),
            ] {
                prop_assert_eq!(q.alpha, p.alpha * two);
                prop_assert_eq!(q.beta1, p.beta1 * two);
                prop_assert_eq!(q.beta2, p.beta2 * two);
                prop_assert_eq!(q.gamma, p.gamma * two);
                prop_assert_eq!(q.file_size, p.file_size * two);
                prop_assert_eq!(max_file_size(k, d, r, &q), max_file_size(k, d, r, &p) * two);
            }
        }
    }
}
