//! Witness sequence for the failure of the corona factorization property in
//! the `k = ∞` type-II algebra, verified at finite stages.
//!
//! With `λ(n) = n^2 · n!` and `Y_n = CP^{λ(1)} × ... × CP^{λ(n)}`, the terms
//! are `x_n = k(n) · ζ_{l(n)}` with `k(n) = λ(l(n))/2`.

use crate::bundles::BundleExpr;
use crate::comparison::{dominates_by_rank, obstructed_by_euler, ComparisonVerdict};
use crate::exact::{rational, uint_str};
use crate::spaces::{SpaceAtom, SpaceDescriptor, SpaceMap};
use crate::v2_type2::{build_stage, cp_factor, factorial, push_between, push_between_closed_form, push_forward, sigma, stage_space, zeta, KParam, V2Params, MAX_STAGE};
use crate::{Budget, Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

const K: KParam = KParam::Infinite;

/// Stages checked explicitly by [`find_l1`] before the symbolic tail takes over.
pub const L1_HORIZON: usize = 24;

/// `λ(n) = n^2 · n!`.
pub fn lambda(n: u64) -> BigUint {
    factorial(n) * n * n
}

/// `Σ_{j<=n} λ(j)`, the complex dimension of `Y_n`.
pub fn lambda_sum(n: u64) -> BigUint {
    (1..=n).map(lambda).sum()
}

pub fn y_space(n: usize) -> Result<SpaceDescriptor> {
    SpaceDescriptor::new((1..=n).map(|j| SpaceAtom::cp(lambda(j as u64), format!("CP{j}"))).collect())
}

/// `ξ̄_n = θ_1 ⊕ σ(1)ζ̄_1 ⊕ ... ⊕ σ(n)ζ̄_n` over `Y_n`.
pub fn y_unit(n: usize) -> Result<BundleExpr> {
    let y = y_space(n)?;
    (1..=n).try_fold(BundleExpr::trivial(&y, 1u32), |acc, j| acc.direct_sum(&BundleExpr::line(&y, j - 1, sigma(j as u64))?))
}

/// `⊕_{s<=j} λ(s) ζ_s` over `X_j`.
pub fn lambda_capped_sum(j: usize) -> Result<BundleExpr> {
    let x = stage_space(K, j)?;
    (1..=j).try_fold(BundleExpr::zero(&x), |acc, s| acc.direct_sum(&zeta(K, j, s, lambda(s as u64))?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Row {
    pub m: usize,
    #[serde(with = "uint_str")]
    pub lambda: BigUint,
    /// `Σ_{j<=m} λ(j)`.
    #[serde(with = "uint_str")]
    pub half_dimension: BigUint,
    pub divisible_by_4: bool,
    /// `(5/4) λ(m) >= Σ_{j<=m} λ(j)`.
    pub dimension_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioRow {
    pub j: usize,
    /// `λ(j-1)/λ(j) = (j-1)^2 / j^3`.
    #[serde(with = "rational")]
    pub ratio: BigRational,
    pub at_most_one_fifth: bool,
}

/// Why the two conditions hold for every `m` past the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailCertificate {
    /// Ratios checked one by one below [`TailCertificate::symbolic_from`].
    pub ratio_rows: Vec<RatioRow>,
    /// For `j >= symbolic_from`, `(j-1)^2/j^3 < 1/j <= 1/5`.
    pub symbolic_from: usize,
    /// All consecutive ratios are at most `1/5`, so a geometric series gives
    /// `Σ_{j<m} λ(j) <= λ(m)/4` for every `m >= 1`.
    pub dimension_bound_all_m: bool,
    /// `4 | m!` once `m >= 4`, hence `4 | λ(m)`.
    pub divisibility_from: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Report {
    pub l1: usize,
    pub finite_checks: Vec<L1Row>,
    pub tail: TailCertificate,
}

fn l1_row(m: usize) -> L1Row {
    let lambda_m = lambda(m as u64);
    let half_dimension = lambda_sum(m as u64);
    L1Row {
        m,
        divisible_by_4: lambda_m.is_multiple_of(&BigUint::from(4u32)),
        dimension_bound: &lambda_m * 5u32 >= &half_dimension * 4u32,
        lambda: lambda_m,
        half_dimension,
    }
}

/// Minimal `l(1)` such that every `m >= l(1)` has `4 | λ(m)` and
/// `(5/4)λ(m) >= dim(Y_m)/2`. Stages up to [`L1_HORIZON`] are checked
/// directly; beyond it the tail certificate applies.
pub fn find_l1() -> L1Report {
    let finite_checks: Vec<L1Row> = (1..=L1_HORIZON).map(l1_row).collect();
    let symbolic_from = 5;
    let ratio_rows: Vec<RatioRow> = (2..symbolic_from)
        .map(|j| {
            let ratio = BigRational::new(BigInt::from(lambda(j as u64 - 1)), BigInt::from(lambda(j as u64)));
            let at_most_one_fifth = ratio <= BigRational::new(1.into(), 5.into());
            RatioRow { j, ratio, at_most_one_fifth }
        })
        .collect();
    let tail = TailCertificate {
        dimension_bound_all_m: ratio_rows.iter().all(|r| r.at_most_one_fifth),
        ratio_rows,
        symbolic_from,
        divisibility_from: 4,
    };
    let tail_ok = tail.dimension_bound_all_m && tail.divisibility_from <= L1_HORIZON;
    let l1 = finite_checks
        .iter()
        .rposition(|r| !(r.divisible_by_4 && r.dimension_bound))
        .map(|idx| idx + 2)
        .unwrap_or(1);
    debug_assert!(tail_ok);
    L1Report { l1: if tail_ok { l1 } else { usize::MAX }, finite_checks, tail }
}

/// The growth condition `S·σ(m)/(prev+1)! <= λ(m)/2` for `m > prev`, with
/// `S = Σ_{j<=prev} λ(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextLReport {
    pub prev: usize,
    pub next: usize,
    #[serde(with = "rational")]
    pub lhs: BigRational,
    #[serde(with = "rational")]
    pub rhs: BigRational,
    /// `rhs - lhs`.
    #[serde(with = "rational")]
    pub margin: BigRational,
    pub holds: bool,
    /// The inequality fails at `next - 1` (or `next - 1 = prev`).
    pub minimal: bool,
}

fn growth_sides(prev: usize, m: usize) -> (BigRational, BigRational) {
    let s = BigInt::from(lambda_sum(prev as u64));
    let lhs = BigRational::new(s * BigInt::from(sigma(m as u64)), BigInt::from(factorial(prev as u64 + 1)));
    let rhs = BigRational::new(BigInt::from(lambda(m as u64)), BigInt::from(2));
    (lhs, rhs)
}

/// Minimal `m > prev` satisfying the growth condition. It is equivalent to
/// `S/(prev+1)! <= m/2`, which gives the candidate in closed form; the
/// original inequality is then rechecked.
pub fn next_l(prev: usize) -> Result<NextLReport> {
    if prev == 0 {
        return Err(Error::Precondition("prev_l must be at least 1".into()));
    }
    if prev >= MAX_STAGE {
        return Err(Error::TooLarge(format!("stage {prev} exceeds the ceiling {MAX_STAGE}")));
    }
    let s = lambda_sum(prev as u64) * 2u32;
    let f = factorial(prev as u64 + 1);
    let candidate = s.div_ceil(&f);
    let next = candidate.try_into().unwrap_or(usize::MAX).max(prev + 1);
    if next > MAX_STAGE {
        return Err(Error::TooLarge(format!("next stage {next} exceeds the ceiling {MAX_STAGE}")));
    }
    let (lhs, rhs) = growth_sides(prev, next);
    let minimal = next == prev + 1 || {
        let (l, r) = growth_sides(prev, next - 1);
        l > r
    };
    Ok(NextLReport { prev, next, margin: &rhs - &lhs, holds: lhs <= rhs, lhs, rhs, minimal })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfpTerm {
    pub index: usize,
    pub l: usize,
    #[serde(with = "uint_str")]
    pub k_val: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfpWitness {
    pub terms: Vec<CfpTerm>,
}

impl CfpWitness {
    pub fn ls(&self) -> Vec<usize> {
        self.terms.iter().map(|t| t.l).collect()
    }

    pub fn term(&self, n: usize) -> Result<&CfpTerm> {
        n.checked_sub(1)
            .and_then(|i| self.terms.get(i))
            .ok_or_else(|| Error::Precondition(format!("witness has no term {n}")))
    }
}

/// Builds `count` terms, starting from `overrides` (a prefix of the `l`
/// sequence) and continuing with minimal choices. Overrides must satisfy the
/// same conditions as the minimal choices.
pub fn build_witness(count: usize, overrides: &[usize]) -> Result<CfpWitness> {
    if count == 0 {
        return Err(Error::Precondition("need at least one term".into()));
    }
    if overrides.len() > count {
        return Err(Error::Precondition(format!("{} overrides for {count} terms", overrides.len())));
    }
    let l1 = find_l1().l1;
    let mut ls: Vec<usize> = Vec::with_capacity(count);
    for n in 0..count {
        let l = match overrides.get(n) {
            Some(&l) => {
                if l > MAX_STAGE {
                    return Err(Error::TooLarge(format!("l = {l} exceeds the ceiling {MAX_STAGE}")));
                }
                match ls.last() {
                    None if l < l1 => return Err(Error::Precondition(format!("l(1) = {l} is below the minimum {l1}"))),
                    Some(&prev) => {
                        if l <= prev {
                            return Err(Error::Precondition(format!("l must increase strictly, got {prev} then {l}")));
                        }
                        let (lhs, rhs) = growth_sides(prev, l);
                        if lhs > rhs {
                            return Err(Error::Precondition(format!("l({}) = {l} violates the growth condition", n + 1)));
                        }
                    }
                    None => {}
                }
                l
            }
            None => match ls.last() {
                None => l1,
                Some(&prev) => next_l(prev)?.next,
            },
        };
        ls.push(l);
    }
    let terms = ls
        .into_iter()
        .enumerate()
        .map(|(i, l)| CfpTerm { index: i + 1, l, k_val: lambda(l as u64) / 2u32 })
        .collect();
    Ok(CfpWitness { terms })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperReport {
    pub index: usize,
    pub l: usize,
    /// `rank(5k(n) ζ̄_{l(n)})`.
    #[serde(with = "uint_str")]
    pub witness_rank: BigUint,
    /// `rank(ξ̄_{l(n)}) = (l(n)+1)!`.
    #[serde(with = "uint_str")]
    pub unit_rank: BigUint,
    /// `dim(Y_{l(n)})/2`.
    #[serde(with = "uint_str")]
    pub half_dimension: BigUint,
    /// `ξ̄` pulls back along `X_l -> Y_l` to the unit bundle of stage `l`.
    pub unit_pullback_matches: bool,
    pub verdict: ComparisonVerdict,
}

impl UpperReport {
    pub fn passed(&self) -> bool {
        self.unit_pullback_matches && self.verdict.dominates()
    }
}

/// `5 x_n` dominates the unit: `ξ̄_{l} ≾ 5k(n) ζ̄_{l}` over `Y_l` by rank.
pub fn verify_upper(term: &CfpTerm) -> Result<UpperReport> {
    let l = term.l;
    let y = y_space(l)?;
    let unit = y_unit(l)?;
    let five_k = &term.k_val * 5u32;
    let witness = if five_k.is_zero() { BundleExpr::zero(&y) } else { BundleExpr::line(&y, l - 1, five_k)? };
    let verdict = dominates_by_rank(&unit, &witness)?;

    let x = stage_space(K, l)?;
    let to_y = SpaceMap::projection_onto(&x, &y, (1..=l).map(|j| cp_factor(K, j)).collect())?;
    let unit_pullback_matches = unit.pullback(&to_y)? == build_stage(V2Params::new(K, l)?)?.unit;
    Ok(UpperReport {
        index: term.index,
        l,
        witness_rank: witness.rank(),
        unit_rank: unit.rank(),
        half_dimension: y.half_dimension_ceil(),
        unit_pullback_matches,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub s: usize,
    /// Multiplicity of `ζ_s` in `⊕_i φ_{l(i),j}^*(k(i) ζ_{l(i)})`.
    #[serde(with = "uint_str")]
    pub coefficient: BigUint,
    #[serde(with = "uint_str")]
    pub lambda: BigUint,
    pub within: bool,
}

/// One induction step `m`: the pushed bound from `l(m-1)` plus `k(m) ζ_{l(m)}`
/// stays inside `⊕_{s<=l(m)} λ(s) ζ_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InductionRow {
    pub index: usize,
    pub prev_l: Option<usize>,
    pub l: usize,
    /// `N = Σ_{s<=l(m-1)} λ(s)`.
    #[serde(with = "uint_str")]
    pub n_rank: BigUint,
    /// `N σ(l(m)) / (l(m-1)+1)!`.
    #[serde(with = "uint_str")]
    pub pushed_top: BigUint,
    #[serde(with = "uint_str")]
    pub k_val: BigUint,
    #[serde(with = "uint_str")]
    pub lambda: BigUint,
    /// `k(m) + pushed_top <= λ(l(m))`.
    pub inequality_holds: bool,
    /// The same containment checked on bundles, every coefficient included.
    pub summand_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub from_stage: usize,
    pub summand_of_next: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerReport {
    pub terms: usize,
    pub stage: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub induction: Vec<InductionRow>,
    pub chain: Vec<ChainStep>,
    /// Stepwise and closed-form pushforwards agree.
    pub pushforward_consistent: bool,
    pub obstruction: ComparisonVerdict,
}

impl LowerReport {
    pub fn passed(&self) -> bool {
        self.pushforward_consistent
            && self.coefficients.iter().all(|r| r.within)
            && self.induction.iter().all(|r| r.inequality_holds && r.summand_holds)
            && self.chain.iter().all(|r| r.summand_of_next)
            && self.obstruction.obstructed()
    }
}

fn pushed_witness(w: &CfpWitness, n: usize, j: usize, closed: bool) -> Result<BundleExpr> {
    let x = stage_space(K, j)?;
    w.terms[..n].iter().try_fold(BundleExpr::zero(&x), |acc, t| {
        let base = zeta(K, t.l, t.l, t.k_val.clone())?;
        let pushed = if closed { push_between_closed_form(K, t.l, j, &base)? } else { push_between(K, t.l, j, &base)? };
        acc.direct_sum(&pushed)
    })
}

/// `θ_1` is not dominated by the pushed-forward first `n` witness terms at
/// stage `j >= l(n)`.
pub fn verify_lower(w: &CfpWitness, n: usize, j: usize, budget: Budget) -> Result<LowerReport> {
    let last = w.term(n)?;
    if j < last.l {
        return Err(Error::Precondition(format!("stage {j} is before l({n}) = {}", last.l)));
    }
    if j > MAX_STAGE {
        return Err(Error::TooLarge(format!("stage {j} exceeds the ceiling {MAX_STAGE}")));
    }
    let pushed = pushed_witness(w, n, j, true)?;
    let pushforward_consistent = pushed == pushed_witness(w, n, j, false)?;
    let coefficients = (1..=j)
        .map(|s| {
            let coefficient = pushed.multiplicity_on(cp_factor(K, s));
            let lambda = lambda(s as u64);
            CoefficientRow { s, within: coefficient <= lambda, coefficient, lambda }
        })
        .collect();

    let mut induction = Vec::new();
    for (idx, t) in w.terms[..n].iter().enumerate() {
        let lambda_l = lambda(t.l as u64);
        let own = zeta(K, t.l, t.l, t.k_val.clone())?;
        let (prev_l, n_rank, pushed_top, bound) = match idx.checked_sub(1).map(|p| w.terms[p].l) {
            None => (None, BigUint::zero(), BigUint::zero(), own),
            Some(prev) => {
                let n_rank = lambda_sum(prev as u64);
                let pushed_top = &n_rank * sigma(t.l as u64) / factorial(prev as u64 + 1);
                let bound = push_between_closed_form(K, prev, t.l, &lambda_capped_sum(prev)?)?.direct_sum(&own)?;
                (Some(prev), n_rank, pushed_top, bound)
            }
        };
        induction.push(InductionRow {
            index: t.index,
            prev_l,
            l: t.l,
            inequality_holds: &t.k_val + &pushed_top <= lambda_l,
            summand_holds: bound.is_summand_of(&lambda_capped_sum(t.l)?)?,
            n_rank,
            pushed_top,
            k_val: t.k_val.clone(),
            lambda: lambda_l,
        });
    }

    let chain = (last.l..j)
        .map(|t| {
            let stepped = push_forward(K, t, &lambda_capped_sum(t)?)?;
            Ok(ChainStep { from_stage: t, summand_of_next: stepped.is_summand_of(&lambda_capped_sum(t + 1)?)? })
        })
        .collect::<Result<Vec<_>>>()?;

    let target = lambda_capped_sum(j)?;
    let obstruction = obstructed_by_euler(&BundleExpr::trivial(target.base(), 1u32), &target, budget)?;
    Ok(LowerReport { terms: n, stage: j, coefficients, induction, chain, pushforward_consistent, obstruction })
}
