//! Axiom checkers for probabilistic voting rules.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lottery::{
    exists_strict_sd_improvement, sd_compare, Lottery, Rational, SdRelation,
};
use crate::prefs::{all_weak_orders, count_weak_orders, Profile, WeakOrder};
use crate::ratlp::{build_sd_dominance_lp, solve_lp, LpOutcome};
use crate::rules::Rule;

/// Alternatives not Pareto dominated: no `b` is weakly preferred by every
/// agent and strictly by one.
pub fn pareto_optimal_set(profile: &Profile) -> Vec<usize> {
    let m = profile.num_alternatives();
    (0..m)
        .filter(|&a| !(0..m).any(|b| pareto_dominates(profile, b, a)))
        .collect()
}

/// `b` Pareto dominates `a`.
pub fn pareto_dominates(profile: &Profile, b: usize, a: usize) -> bool {
    let orders = profile.orders();
    orders.iter().all(|o| o.weakly_prefers(b, a)) && orders.iter().any(|o| o.strictly_prefers(b, a))
}

pub fn ex_post_efficient(p: &Lottery, profile: &Profile) -> bool {
    let pareto = pareto_optimal_set(profile);
    p.support().iter().all(|a| pareto.binary_search(a).is_ok())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EfficiencyVerdict {
    Efficient,
    /// `witness` SD-dominates the tested lottery.
    Dominated { witness: Lottery },
}

impl EfficiencyVerdict {
    pub fn is_efficient(&self) -> bool {
        matches!(self, EfficiencyVerdict::Efficient)
    }
}

/// SD-efficiency via the slack-maximisation LP: efficient iff the optimum is
/// zero, otherwise the optimal `q` is a dominating lottery.
pub fn sd_efficient(p: &Lottery, profile: &Profile) -> EfficiencyVerdict {
    let m = profile.num_alternatives();
    let lp = build_sd_dominance_lp(p, profile);
    match solve_lp(&lp) {
        LpOutcome::Optimal { value, assignment } => {
            if value.is_zero() {
                EfficiencyVerdict::Efficient
            } else {
                let witness = Lottery::from_vec(assignment[..m].to_vec())
                    .expect("Σ q = 1 is a constraint");
                EfficiencyVerdict::Dominated { witness }
            }
        }
        // q = p with zero slacks is feasible and the objective is bounded by
        // the number of thresholds
        other => unreachable!("dominance LP cannot be {other:?}"),
    }
}

/// `q` weakly SD-dominates `p` for every agent and strictly for at least one.
pub fn sd_dominates(q: &Lottery, p: &Lottery, profile: &Profile) -> Result<bool> {
    let mut strict = false;
    for o in profile.orders() {
        match sd_compare(q, p, o)? {
            SdRelation::FirstStrict => strict = true,
            SdRelation::Equal => {}
            _ => return Ok(false),
        }
    }
    Ok(strict)
}

/// Every agent weakly SD-prefers `p` to the uniform lottery.
pub fn sd_uniform_ok(p: &Lottery, profile: &Profile) -> Result<bool> {
    let uniform = Lottery::uniform(profile.num_alternatives());
    for o in profile.orders() {
        if !sd_compare(p, &uniform, o)?.first_weakly() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub const PROPORTIONAL_SHARE_MAX_AGENTS: usize = 20;

/// Every coalition `S` gets at least `|S|/n` on the union of its members'
/// first classes.
///
/// Agents with the same first class are grouped; for a set of groups the
/// binding coalition is their full union, so only `2^groups` sets are
/// checked.
pub fn proportional_share_ok(p: &Lottery, profile: &Profile) -> Result<bool> {
    proportional_share_ok_capped(p, profile, PROPORTIONAL_SHARE_MAX_AGENTS)
}

pub fn proportional_share_ok_capped(p: &Lottery, profile: &Profile, cap: usize) -> Result<bool> {
    let n = profile.num_agents();
    if n > cap {
        return Err(Error::OverCap {
            what: "agents",
            value: n as u128,
            cap: cap as u128,
        });
    }
    let mut groups: BTreeMap<&[usize], usize> = BTreeMap::new();
    for o in profile.orders() {
        *groups.entry(o.first_class()).or_insert(0) += 1;
    }
    let groups: Vec<(&[usize], usize)> = groups.into_iter().collect();
    let m = profile.num_alternatives();
    let nn = BigInt::from(n);
    for mask in 1u32..(1u32 << groups.len()) {
        let mut covered = vec![false; m];
        let mut members = 0usize;
        for (g, (class, count)) in groups.iter().enumerate() {
            if mask & (1 << g) != 0 {
                members += count;
                for &a in *class {
                    covered[a] = true;
                }
            }
        }
        let mass: Rational = (0..m).filter(|&a| covered[a]).map(|a| p.prob(a)).sum();
        if mass < Rational::new(BigInt::from(members), nn.clone()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcomes with and without one agent and the participation levels they
/// satisfy for that agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticipationReport {
    pub with_outcome: Lottery,
    pub without_outcome: Lottery,
    /// Abstaining is not strictly SD-better.
    pub sd_ok: bool,
    /// Participating is weakly SD-better.
    pub strong_ok: bool,
    /// Participating is strictly SD-better whenever any strict improvement
    /// over the abstention outcome exists.
    pub very_strong_ok: bool,
}

pub fn participation_report(rule: &Rule, profile: &Profile, i: usize) -> Result<ParticipationReport> {
    let without = profile.drop_agent(i)?;
    let q = rule.apply(profile)?;
    let p = rule.apply(&without)?;
    let order = profile.order(i);
    let rel = sd_compare(&q, &p, order)?;
    let sd_ok = rel != SdRelation::SecondStrict;
    let strong_ok = rel.first_weakly();
    let very_strong_ok =
        strong_ok && (rel == SdRelation::FirstStrict || !exists_strict_sd_improvement(&p, order));
    Ok(ParticipationReport {
        with_outcome: q,
        without_outcome: p,
        sd_ok,
        strong_ok,
        very_strong_ok,
    })
}

/// Which misreports a strategyproofness scan considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    All,
    Strict,
    Dichotomous,
}

impl Domain {
    pub fn contains(self, order: &WeakOrder) -> bool {
        match self {
            Domain::All => true,
            Domain::Strict => order.is_strict(),
            Domain::Dichotomous => order.is_dichotomous(),
        }
    }
}

/// A misreport that strictly SD-improves the outcome for the true order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manipulation {
    pub misreport: WeakOrder,
    pub outcome: Lottery,
}

pub const STRATEGYPROOFNESS_MAX_ALTERNATIVES: usize = 5;

pub fn strategyproofness_scan(
    rule: &Rule,
    profile: &Profile,
    i: usize,
    domain: Domain,
) -> Result<Vec<Manipulation>> {
    strategyproofness_scan_capped(rule, profile, i, domain, STRATEGYPROOFNESS_MAX_ALTERNATIVES)
}

pub fn strategyproofness_scan_capped(
    rule: &Rule,
    profile: &Profile,
    i: usize,
    domain: Domain,
    cap: usize,
) -> Result<Vec<Manipulation>> {
    let m = profile.num_alternatives();
    if m > cap {
        return Err(Error::OverCap {
            what: "alternatives",
            value: m as u128,
            cap: cap as u128,
        });
    }
    if i >= profile.num_agents() {
        return Err(Error::NoSuchAgent(i));
    }
    let truthful = rule.apply(profile)?;
    let order = profile.order(i);
    let misreports: Vec<WeakOrder> = all_weak_orders(m)?
        .into_iter()
        .filter(|w| domain.contains(w) && w != order)
        .collect();
    debug_assert!(misreports.len() as u128 <= count_weak_orders(m)?);
    let found: Vec<Option<Manipulation>> = misreports
        .into_par_iter()
        .map(|w| -> Result<Option<Manipulation>> {
            let outcome = rule.apply(&profile.with_order(i, w.clone())?)?;
            Ok((sd_compare(&outcome, &truthful, order)? == SdRelation::FirstStrict).then_some(
                Manipulation {
                    misreport: w,
                    outcome,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Reinforcing `a` in agent `i`'s order never lowers its probability.
pub fn monotonicity_check(rule: &Rule, profile: &Profile, i: usize, a: usize) -> Result<bool> {
    if i >= profile.num_agents() {
        return Err(Error::NoSuchAgent(i));
    }
    let before = rule.apply(profile)?;
    for w in profile.order(i).reinforcements(a)? {
        let after = rule.apply(&profile.with_order(i, w)?)?;
        if after.prob(a) < before.prob(a) {
            return Ok(false);
        }
    }
    Ok(true)
}
