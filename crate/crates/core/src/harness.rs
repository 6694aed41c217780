//! Experiments and brute-force oracles.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lottery::{Lottery, Rational};
use crate::prefs::{all_weak_orders, count_weak_orders, sample_profile, Profile, WeakOrder};
use crate::rules::{rmec, rsd, Rule};
use crate::verify::{sd_dominates, sd_efficient};

/// Size limits for experiment cells.
pub const MAX_AGENTS: usize = 32;
pub const MAX_ALTERNATIVES: usize = 12;
pub const RSD_MAX_AGENTS: usize = 10;
pub const RSD_MAX_ALTERNATIVES: usize = 8;

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// `(n, m)` cells.
    pub sizes: Vec<(usize, usize)>,
    pub trials: u64,
    pub seed: u64,
    pub rule: Rule,
}

impl ExperimentSpec {
    /// Cartesian product of agent and alternative ranges.
    pub fn grid(
        agents: std::ops::RangeInclusive<usize>,
        alternatives: std::ops::RangeInclusive<usize>,
        trials: u64,
        seed: u64,
    ) -> Self {
        let sizes = alternatives
            .flat_map(|m| agents.clone().map(move |n| (n, m)))
            .collect();
        ExperimentSpec {
            sizes,
            trials,
            seed,
            rule: Rule::Rmec,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::OverCap {
                what: "trials (must be >= 1)",
                value: 0,
                cap: u64::MAX as u128,
            });
        }
        let (max_n, max_m) = if self.rule == Rule::Rsd {
            (RSD_MAX_AGENTS, RSD_MAX_ALTERNATIVES)
        } else {
            (MAX_AGENTS, MAX_ALTERNATIVES)
        };
        for &(n, m) in &self.sizes {
            if n == 0 || m == 0 {
                return Err(Error::EmptyProfile);
            }
            if n > max_n {
                return Err(Error::OverCap {
                    what: "agents",
                    value: n as u128,
                    cap: max_n as u128,
                });
            }
            if m > max_m {
                return Err(Error::OverCap {
                    what: "alternatives",
                    value: m as u128,
                    cap: max_m as u128,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellResult {
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub sd_efficient_count: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Seed for trial `trial` of cell `cell`, independent of evaluation order.
pub fn trial_seed(seed: u64, cell: u64, trial: u64) -> u64 {
    // splitmix64 finaliser over the combined counter
    let mut z = seed
        ^ cell.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ trial.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// For each cell, counts how many random profiles get an SD-efficient
/// outcome from the rule.
pub fn run_table2(spec: &ExperimentSpec) -> Result<Vec<CellResult>> {
    spec.validate()?;
    spec.sizes
        .iter()
        .enumerate()
        .map(|(c, &(n, m))| {
            let start = Instant::now();
            let count = (0..spec.trials)
                .into_par_iter()
                .map(|t| -> Result<u64> {
                    let profile = sample_profile(n, m, trial_seed(spec.seed, c as u64, t))?;
                    let p = spec.rule.apply(&profile)?;
                    Ok(sd_efficient(&p, &profile).is_efficient() as u64)
                })
                .try_reduce(|| 0, |a, b| Ok(a + b))?;
            Ok(CellResult {
                n,
                m,
                trials: spec.trials,
                sd_efficient_count: count,
                elapsed: start.elapsed(),
            })
        })
        .collect()
}

/// Number of multisets of size `n` drawn from `k` kinds.
pub fn multiset_count(k: u128, n: u128) -> Option<u128> {
    // C(k + n - 1, n)
    let mut r: u128 = 1;
    for i in 0..n {
        r = r.checked_mul(k + n - 1 - i)? / (i + 1);
    }
    Some(r)
}

pub const EXHAUSTIVE_BUDGET: u128 = 5_000_000;

/// Visits every non-decreasing index sequence of length `len` over
/// `start..k`, with `prefix` prepended.
fn for_each_multiset(k: usize, len: usize, start: usize, prefix: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if len == 0 {
        f(prefix);
        return;
    }
    for i in start..k {
        prefix.push(i);
        for_each_multiset(k, len - 1, i, prefix, f);
        prefix.pop();
    }
}

/// Counts anonymity classes of `n`-agent profiles over `m` alternatives
/// whose RMEC outcome is SD-dominated.
pub fn exhaustive_rmec_efficiency(n: usize, m: usize) -> Result<u64> {
    exhaustive_rmec_efficiency_budgeted(n, m, EXHAUSTIVE_BUDGET)
}

pub fn exhaustive_rmec_efficiency_budgeted(n: usize, m: usize, budget: u128) -> Result<u64> {
    if n == 0 || m == 0 {
        return Err(Error::EmptyProfile);
    }
    let k = count_weak_orders(m)?;
    let instances = multiset_count(k, n as u128).ok_or(Error::Overflow(m))?;
    if instances > budget {
        return Err(Error::OverCap {
            what: "profiles",
            value: instances,
            cap: budget,
        });
    }
    let orders = all_weak_orders(m)?;
    let k = orders.len();
    let count = (0..k)
        .into_par_iter()
        .map(|first| {
            let mut bad = 0u64;
            let mut prefix = vec![first];
            for_each_multiset(k, n - 1, first, &mut prefix, &mut |idx| {
                let profile = Profile::from_orders(idx.iter().map(|&i| orders[i].clone()).collect())
                    .expect("valid orders");
                if !sd_efficient(&rmec(&profile).lottery, &profile).is_efficient() {
                    bad += 1;
                }
            });
            bad
        })
        .sum();
    Ok(count)
}

/// `supp(rmec) ⊆ supp(rsd)`.
pub fn support_containment_check(profile: &Profile) -> Result<bool> {
    if profile.num_agents() > RSD_MAX_AGENTS {
        return Err(Error::OverCap {
            what: "agents",
            value: profile.num_agents() as u128,
            cap: RSD_MAX_AGENTS as u128,
        });
    }
    let r = rsd(profile)?;
    Ok(rmec(profile)
        .lottery
        .support()
        .iter()
        .all(|&a| r.prob(a) > &Rational::from_integer(0.into())))
}

pub const GRID_BUDGET: u128 = 2_000_000;

/// Searches lotteries with probabilities in `{0, 1/L, ..., 1}` for one that
/// SD-dominates `p`. A witness is always valid; `None` proves nothing.
pub fn grid_dominance_oracle(p: &Lottery, profile: &Profile, denominator: u64) -> Result<Option<Lottery>> {
    grid_dominance_oracle_budgeted(p, profile, denominator, GRID_BUDGET)
}

pub fn grid_dominance_oracle_budgeted(
    p: &Lottery,
    profile: &Profile,
    denominator: u64,
    budget: u128,
) -> Result<Option<Lottery>> {
    let m = profile.num_alternatives();
    if denominator == 0 {
        return Err(Error::EmptySet);
    }
    // compositions of L into m parts
    let points = multiset_count(m as u128, denominator as u128).ok_or(Error::Overflow(m))?;
    if points > budget {
        return Err(Error::OverCap {
            what: "grid points",
            value: points,
            cap: budget,
        });
    }
    let den = BigInt::from(denominator);
    let mut parts = vec![0u64; m];
    parts[m - 1] = denominator;
    loop {
        let q = Lottery::from_vec(
            parts
                .iter()
                .map(|&c| Rational::new(BigInt::from(c), den.clone()))
                .collect(),
        )?;
        if sd_dominates(&q, p, profile)? {
            return Ok(Some(q));
        }
        if !next_composition(&mut parts) {
            return Ok(None);
        }
    }
}

/// Steps to the next composition (fixed sum, fixed length) in colex-like
/// order; returns false after the last one.
fn next_composition(parts: &mut [u64]) -> bool {
    let m = parts.len();
    // find the rightmost position (other than the last) that can take one
    // more unit from the tail
    let tail: u64 = parts[m - 1];
    if m == 1 {
        return false;
    }
    if tail > 0 {
        parts[m - 2] += 1;
        parts[m - 1] -= 1;
        return true;
    }
    // tail is empty: carry
    let mut j = m - 2;
    loop {
        if parts[j] > 0 {
            if j == 0 {
                return false;
            }
            let moved = parts[j];
            parts[j] = 0;
            parts[j - 1] += 1;
            parts[m - 1] = moved - 1;
            return true;
        }
        if j == 0 {
            return false;
        }
        j -= 1;
    }
}

/// All profiles (as ordered tuples) whose orders lie in `domain_orders`.
pub fn all_profiles(domain_orders: &[WeakOrder], n: usize) -> Vec<Profile> {
    let mut out = Vec::new();
    let k = domain_orders.len();
    let total = k.pow(n as u32);
    for mut code in 0..total {
        let mut orders = Vec::with_capacity(n);
        for _ in 0..n {
            orders.push(domain_orders[code % k].clone());
            code /= k;
        }
        out.push(Profile::from_orders(orders).expect("valid"));
    }
    out
}
