//! Sufficient criteria for Cuntz comparison of projections over modeled
//! spaces, phrased on their bundles.
//!
//! Comparison is only ever certified, never decided: a rank gap of at least
//! half the base dimension proves domination, a nonzero Euler class proves
//! that no trivial line bundle fits inside. Everything else is `Unknown`.

use crate::bundles::{euler_check, BundleExpr, EulerCheck};
use crate::exact::uint_str;
use crate::{Budget, Error, Result};
use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Dominates,
    Obstructed,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `rank(y) >= rank(x) + ceil(dim / 2)`.
    RankGap {
        #[serde(with = "uint_str")]
        lhs_rank: BigUint,
        #[serde(with = "uint_str")]
        rhs_rank: BigUint,
        #[serde(with = "uint_str")]
        half_dimension: BigUint,
        holds: bool,
    },
    /// `2 · rank(y) - 1 >= dim`, so `y` has a trivial line sub-bundle.
    StableRange {
        #[serde(with = "uint_str")]
        rank: BigUint,
        #[serde(with = "uint_str")]
        real_dimension: BigUint,
        holds: bool,
    },
    /// Euler class of the right-hand side; nonzero rules out a trivial summand.
    EulerObstruction { euler: EulerCheck },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub outcome: Outcome,
    pub certificate: Certificate,
}

impl ComparisonVerdict {
    pub fn dominates(&self) -> bool {
        self.outcome == Outcome::Dominates
    }

    pub fn obstructed(&self) -> bool {
        self.outcome == Outcome::Obstructed
    }
}

/// `x ≾ y` whenever the rank of `y` exceeds that of `x` by at least half the
/// real dimension of the base. The zero bundle is dominated by everything.
pub fn dominates_by_rank(x: &BundleExpr, y: &BundleExpr) -> Result<ComparisonVerdict> {
    if x.base() != y.base() {
        return Err(Error::BaseMismatch);
    }
    let lhs_rank = x.rank();
    let rhs_rank = y.rank();
    let half_dimension = x.base().half_dimension_ceil();
    let holds = lhs_rank.is_zero() || rhs_rank >= &lhs_rank + &half_dimension;
    Ok(ComparisonVerdict {
        outcome: if holds { Outcome::Dominates } else { Outcome::Unknown },
        certificate: Certificate::RankGap { lhs_rank, rhs_rank, half_dimension, holds },
    })
}

/// `θ_1 ≾ y` whenever `2 · rank(y) - 1 >= dim(base)`.
pub fn trivial_line_subbundle_sufficient(y: &BundleExpr) -> ComparisonVerdict {
    let rank = y.rank();
    let real_dimension = y.base().real_dimension();
    let holds = &rank * 2u32 >= &real_dimension + 1u32;
    ComparisonVerdict {
        outcome: if holds { Outcome::Dominates } else { Outcome::Unknown },
        certificate: Certificate::StableRange { rank, real_dimension, holds },
    }
}

/// `x ⋠ y` when `x` contains a trivial line and `e(y) != 0`.
pub fn obstructed_by_euler(x: &BundleExpr, y: &BundleExpr, budget: Budget) -> Result<ComparisonVerdict> {
    if x.trivial_rank().is_zero() {
        return Err(Error::Precondition("the left-hand bundle must contain a trivial summand".into()));
    }
    if x.base() != y.base() {
        return Err(Error::BaseMismatch);
    }
    let euler = euler_check(y, budget)?;
    Ok(ComparisonVerdict {
        outcome: if euler.nonzero { Outcome::Obstructed } else { Outcome::Unknown },
        certificate: Certificate::EulerObstruction { euler },
    })
}

/// Largest `d` with `c_d(y) != 0`. Any bundle stably isomorphic to `y` has
/// the same Chern class and therefore rank at least `d`.
/// [`obstructed_by_euler`] using only the structured factorization.
pub fn obstructed_by_euler_structured(x: &BundleExpr, y: &BundleExpr) -> Result<ComparisonVerdict> {
    obstructed_by_euler(x, y, Budget::new(0))
}

pub fn min_rank_stably_equivalent(y: &BundleExpr, budget: Budget) -> Result<BigUint> {
    match y.chern_within(budget) {
        Ok(c) => Ok(BigUint::from(c.top_degree().unwrap_or(0) / 2)),
        Err(Error::BudgetExceeded { .. }) | Err(Error::TooLarge(_)) => Ok(min_rank_structured(y)),
        Err(e) => Err(e),
    }
}

/// Closed form of the top nonzero Chern index: `Σ_f min(m_f, cap_f - 1)`.
/// The top monomial `Π y_f^{min(m_f, cap_f - 1)}` has a nonzero binomial
/// coefficient and lives on disjoint factors.
pub fn min_rank_structured(y: &BundleExpr) -> BigUint {
    y.lines()
        .map(|(factor, m)| {
            let cap = y.base().factors()[factor].kind.generator_cap().expect("line factors carry a generator");
            m.clone().min(cap - 1u32)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{SpaceAtom, SpaceDescriptor};

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn budget() -> Budget {
        Budget::default()
    }

    /// `Y_4 = CP^1 x CP^8 x CP^54 x CP^384`, half-dimension 447.
    fn y4() -> SpaceDescriptor {
        SpaceDescriptor::new(
            [1u32, 8, 54, 384].iter().enumerate().map(|(i, n)| SpaceAtom::cp(*n, format!("cp{}", i + 1))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rank_gap_over_y4() {
        let y = y4();
        assert_eq!(y.half_dimension_ceil(), big(447));
        // ξ̄_4 = θ_1 ⊕ σ(1)ζ̄_1 ⊕ ... ⊕ σ(4)ζ̄_4, rank 5! = 120
        let sigma = [1u32, 4, 18, 96];
        let mut x = BundleExpr::trivial(&y, 1u32);
        for (f, s) in sigma.iter().enumerate() {
            x = x.direct_sum(&BundleExpr::line(&y, f, *s).unwrap()).unwrap();
        }
        assert_eq!(x.rank(), big(120));
        let big_y = BundleExpr::line(&y, 3, 960u32).unwrap();
        let v = dominates_by_rank(&x, &big_y).unwrap();
        assert!(v.dominates());
        assert_eq!(
            v.certificate,
            Certificate::RankGap { lhs_rank: big(120), rhs_rank: big(960), half_dimension: big(447), holds: true }
        );
    }

    #[test]
    fn rank_gap_failures_and_zero_rank() {
        let s = SpaceDescriptor::sphere_power(1);
        let t1 = BundleExpr::trivial(&s, 1u32);
        assert_eq!(dominates_by_rank(&t1, &t1).unwrap().outcome, Outcome::Unknown);
        let zero = BundleExpr::zero(&s);
        assert!(dominates_by_rank(&zero, &BundleExpr::zero(&s)).unwrap().dominates());
        assert!(dominates_by_rank(&zero, &BundleExpr::line(&s, 0, 1u32).unwrap()).unwrap().dominates());
        let other = SpaceDescriptor::sphere_power(2);
        assert_eq!(dominates_by_rank(&t1, &BundleExpr::zero(&other)), Err(Error::BaseMismatch));
    }

    #[test]
    fn stable_range_criterion() {
        for kappa in 1u32..20 {
            let x = SpaceDescriptor::new(vec![SpaceAtom::cp(kappa, "c")]).unwrap();
            let y = BundleExpr::line(&x, 0, 2 * kappa).unwrap();
            assert!(trivial_line_subbundle_sufficient(&y).dominates(), "kappa = {kappa}");
        }
        let s1 = SpaceDescriptor::sphere_power(1);
        assert!(!trivial_line_subbundle_sufficient(&BundleExpr::line(&s1, 0, 1u32).unwrap()).dominates());
        let s2 = SpaceDescriptor::sphere_power(2);
        assert!(trivial_line_subbundle_sufficient(&BundleExpr::trivial(&s2, 3u32)).dominates());
    }

    #[test]
    fn euler_obstructions() {
        let s2 = SpaceDescriptor::sphere_power(2);
        let theta1 = BundleExpr::trivial(&s2, 1u32);
        let y = BundleExpr::line(&s2, 0, 1u32).unwrap().direct_sum(&BundleExpr::line(&s2, 1, 1u32).unwrap()).unwrap();
        assert!(obstructed_by_euler(&theta1, &y, budget()).unwrap().obstructed());
        let t5 = BundleExpr::trivial(&s2, 5u32);
        assert_eq!(obstructed_by_euler(&theta1, &t5, budget()).unwrap().outcome, Outcome::Unknown);
        assert!(matches!(obstructed_by_euler(&y, &y, budget()), Err(Error::Precondition(_))));
    }

    #[test]
    fn minimal_ranks() {
        let s = SpaceDescriptor::sphere_power(3);
        assert!(min_rank_stably_equivalent(&BundleExpr::trivial(&s, 4u32), budget()).unwrap().is_zero());
        let mut hopf = BundleExpr::zero(&s);
        for f in 0..3 {
            hopf = hopf.direct_sum(&BundleExpr::line(&s, f, 1u32).unwrap()).unwrap();
        }
        assert_eq!(min_rank_stably_equivalent(&hopf, budget()).unwrap(), big(3));
        let heavy = BundleExpr::line(&s, 1, 9u32).unwrap();
        assert_eq!(min_rank_stably_equivalent(&heavy, budget()).unwrap(), big(1));
        assert_eq!(min_rank_structured(&heavy), big(1));
    }
}
