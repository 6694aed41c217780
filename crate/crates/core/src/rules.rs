//! Probabilistic voting rules.
//!
//! The central rule is the rank-maximal equal contribution rule: each agent
//! spends `1/n` probability uniformly on those of their top alternatives that
//! have the lexicographically best rank vector. Its scoring generalisation
//! replaces the rank vector by a positional score.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lottery::{format_rational, parse_rational, Lottery, Rational};
use crate::prefs::{check_permutation, Profile};

/// `counts[j]` = number of agents with the alternative in their `(j+1)`-th
/// class. Compared lexicographically; greater is better.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankVector(pub Vec<u32>);

impl RankVector {
    pub fn counts(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for RankVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Strictly decreasing positional scores `s_1 > ... > s_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoringVector(Vec<Rational>);

impl ScoringVector {
    pub fn new(scores: Vec<Rational>) -> Result<Self> {
        if scores.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::NotDecreasing);
        }
        Ok(ScoringVector(scores))
    }

    /// Parses a comma-separated list of rational literals.
    pub fn parse(text: &str) -> Result<Self> {
        let scores = text
            .split(',')
            .map(|s| {
                parse_rational(s).ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("bad rational `{}`", s.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(scores)
    }

    /// `(m-1, ..., 1, 0)`.
    pub fn borda(m: usize) -> Self {
        Self((0..m).rev().map(|j| Rational::from_integer(BigInt::from(j))).collect())
    }

    /// `s_j = (n+1)^(m-j)`: positional scores that order alternatives exactly
    /// like their rank vectors, since no rank count exceeds `n`.
    pub fn rank_maximal(n: usize, m: usize) -> Self {
        let base = BigInt::from(n + 1);
        Self(
            (0..m)
                .map(|j| Rational::from_integer(num_traits::pow(base.clone(), m - 1 - j)))
                .collect(),
        )
    }

    pub fn scores(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ScoringVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        f.write_str(&parts.join(","))
    }
}

pub fn rank_vector_alt(a: usize, profile: &Profile) -> Result<RankVector> {
    let m = profile.num_alternatives();
    if a >= m {
        return Err(Error::NotInUniverse(a));
    }
    let mut counts = vec![0u32; m];
    for order in profile.orders() {
        counts[order.positions()[a]] += 1;
    }
    Ok(RankVector(counts))
}

/// Rank vectors of all alternatives. `work` is charged one unit per vector
/// cell touched.
fn rank_vectors_counted(profile: &Profile, work: &mut u64) -> Vec<RankVector> {
    let m = profile.num_alternatives();
    let mut counts = vec![vec![0u32; m]; m];
    *work += (m * m) as u64;
    for order in profile.orders() {
        for (a, &j) in order.positions().iter().enumerate() {
            counts[a][j] += 1;
        }
        *work += m as u64;
    }
    counts.into_iter().map(RankVector).collect()
}

pub fn rank_vectors(profile: &Profile) -> Vec<RankVector> {
    rank_vectors_counted(profile, &mut 0)
}

pub fn lex_compare(r: &RankVector, s: &RankVector) -> Result<Ordering> {
    if r.0.len() != s.0.len() {
        return Err(Error::LengthMismatch(r.0.len(), s.0.len()));
    }
    Ok(r.0.cmp(&s.0))
}

pub fn positional_score(a: usize, profile: &Profile, s: &ScoringVector) -> Result<Rational> {
    let m = profile.num_alternatives();
    if s.len() != m {
        return Err(Error::LengthMismatch(s.len(), m));
    }
    if a >= m {
        return Err(Error::NotInUniverse(a));
    }
    Ok(profile
        .orders()
        .iter()
        .map(|o| &s.0[o.positions()[a]])
        .sum())
}

/// How an agent picks among their top alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Comparator {
    RankMaximal,
    Scoring(ScoringVector),
}

enum Keys {
    Rank(Vec<RankVector>),
    Score(Vec<Rational>),
}

impl Keys {
    fn build(profile: &Profile, comparator: &Comparator, work: &mut u64) -> Result<Self> {
        Ok(match comparator {
            Comparator::RankMaximal => Keys::Rank(rank_vectors_counted(profile, work)),
            Comparator::Scoring(s) => {
                let m = profile.num_alternatives();
                if s.len() != m {
                    return Err(Error::LengthMismatch(s.len(), m));
                }
                let mut scores = vec![Rational::zero(); m];
                for order in profile.orders() {
                    for (a, &j) in order.positions().iter().enumerate() {
                        scores[a] += &s.0[j];
                    }
                }
                *work += (m * profile.num_agents()) as u64;
                Keys::Score(scores)
            }
        })
    }

    fn cmp(&self, a: usize, b: usize, work: &mut u64) -> Ordering {
        match self {
            Keys::Rank(r) => {
                *work += r[a].0.len() as u64;
                r[a].cmp(&r[b])
            }
            Keys::Score(s) => {
                *work += 1;
                s[a].cmp(&s[b])
            }
        }
    }

    /// Members of `candidates` with the best key.
    fn best_of(&self, candidates: &[usize], work: &mut u64) -> Vec<usize> {
        let mut best = vec![candidates[0]];
        for &a in &candidates[1..] {
            match self.cmp(a, best[0], work) {
                Ordering::Greater => {
                    best.clear();
                    best.push(a);
                }
                Ordering::Equal => best.push(a),
                Ordering::Less => {}
            }
        }
        best
    }
}

/// `F(i)`: agent `i`'s top alternatives that are best under `comparator`.
pub fn contribution_set(i: usize, profile: &Profile, comparator: &Comparator) -> Result<Vec<usize>> {
    if i >= profile.num_agents() {
        return Err(Error::NoSuchAgent(i));
    }
    let mut work = 0;
    let keys = Keys::build(profile, comparator, &mut work)?;
    Ok(keys.best_of(profile.order(i).first_class(), &mut work))
}

/// Result of an equal-contribution rule, with each agent's share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualContribution {
    pub lottery: Lottery,
    /// `F(i)` for every agent.
    pub contributions: Vec<Vec<usize>>,
    /// Elementary steps spent (rank-vector cells and key comparisons).
    pub work: u64,
}

impl EqualContribution {
    /// `p_i`: agent `i`'s `1/n` spread uniformly over `F(i)`.
    pub fn component(&self, i: usize) -> Vec<Rational> {
        let n = self.contributions.len();
        let f = &self.contributions[i];
        let share = Rational::new(BigInt::one(), BigInt::from(n * f.len()));
        let mut out = vec![Rational::zero(); self.lottery.num_alternatives()];
        for &a in f {
            out[a] = share.clone();
        }
        out
    }
}

pub fn equal_contribution(profile: &Profile, comparator: &Comparator) -> Result<EqualContribution> {
    let n = profile.num_agents();
    let m = profile.num_alternatives();
    let mut work = 0;
    let keys = Keys::build(profile, comparator, &mut work)?;
    let contributions: Vec<Vec<usize>> = profile
        .orders()
        .iter()
        .map(|o| keys.best_of(o.first_class(), &mut work))
        .collect();
    // accumulate over the common denominator n * lcm(|F_i|)
    let lcm = contributions
        .iter()
        .fold(1u64, |l, f| num_integer::lcm(l, f.len() as u64));
    let mut weights = vec![0u64; m];
    for f in &contributions {
        let w = lcm / f.len() as u64;
        for &a in f {
            weights[a] += w;
        }
    }
    let den = BigInt::from(lcm) * BigInt::from(n);
    let probs = weights
        .into_iter()
        .map(|w| Rational::new(BigInt::from(w), den.clone()))
        .collect();
    Ok(EqualContribution {
        lottery: Lottery::from_vec(probs)?,
        contributions,
        work,
    })
}

/// Rank-maximal equal contribution.
pub fn rmec(profile: &Profile) -> EqualContribution {
    equal_contribution(profile, &Comparator::RankMaximal).expect("rank keys always match the profile")
}

/// Equal contribution with respect to a positional scoring vector.
pub fn s_mec(profile: &Profile, s: &ScoringVector) -> Result<EqualContribution> {
    equal_contribution(profile, &Comparator::Scoring(s.clone()))
}

/// Uniform lottery over the alternatives with a lex-maximal rank vector.
pub fn rank_maximal_rule(profile: &Profile) -> Lottery {
    let m = profile.num_alternatives();
    let all: Vec<usize> = (0..m).collect();
    let keys = Keys::Rank(rank_vectors(profile));
    let best = keys.best_of(&all, &mut 0);
    Lottery::uniform_over(&best, m).expect("non-empty")
}

/// Each agent picks their unique top with probability `1/n`.
pub fn random_dictatorship(profile: &Profile) -> Result<Lottery> {
    let m = profile.num_alternatives();
    let n = profile.num_agents();
    let share = Rational::new(BigInt::one(), BigInt::from(n));
    let mut probs = vec![Rational::zero(); m];
    for (i, order) in profile.orders().iter().enumerate() {
        match order.first_class() {
            [a] => probs[*a] += &share,
            _ => return Err(Error::TiedPreference(i)),
        }
    }
    Lottery::from_vec(probs)
}

/// Final working set when agents refine it in the order `perm`.
pub fn serial_dictatorship(profile: &Profile, perm: &[usize]) -> Result<Vec<usize>> {
    check_permutation(perm, profile.num_agents())?;
    let mut working: Vec<usize> = (0..profile.num_alternatives()).collect();
    for &i in perm {
        working = profile.order(i).max_within(&working)?;
    }
    Ok(working)
}

/// Largest electorate accepted by [`rsd`].
pub const RSD_MAX_AGENTS: usize = 20;

/// Random serial dictatorship, averaged exactly over all `n!` orderings.
///
/// Orderings are folded into a dynamic program over the set of agents that
/// have already moved: each state maps a working set to the number of
/// orderings of those agents that produce it.
pub fn rsd(profile: &Profile) -> Result<Lottery> {
    let n = profile.num_agents();
    let m = profile.num_alternatives();
    if n > RSD_MAX_AGENTS {
        return Err(Error::OverCap {
            what: "agents",
            value: n as u128,
            cap: RSD_MAX_AGENTS as u128,
        });
    }
    if m > 64 {
        return Err(Error::OverCap {
            what: "alternatives",
            value: m as u128,
            cap: 64,
        });
    }
    let class_masks: Vec<Vec<u64>> = profile
        .orders()
        .iter()
        .map(|o| {
            o.classes()
                .iter()
                .map(|c| c.iter().fold(0u64, |acc, &a| acc | 1 << a))
                .collect()
        })
        .collect();
    let refine = |i: usize, w: u64| -> u64 {
        class_masks[i]
            .iter()
            .map(|&c| c & w)
            .find(|&x| x != 0)
            .expect("working set is never empty")
    };
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut layer: HashMap<u32, HashMap<u64, u128>> = HashMap::new();
    layer.insert(0, HashMap::from([(full, 1u128)]));
    for _ in 0..n {
        let mut next: HashMap<u32, HashMap<u64, u128>> = HashMap::new();
        for (done, dist) in &layer {
            for i in (0..n).filter(|&i| done & (1 << i) == 0) {
                let slot = next.entry(done | 1 << i).or_default();
                for (&w, &count) in dist {
                    *slot.entry(refine(i, w)).or_insert(0) += count;
                }
            }
        }
        layer = next;
    }
    let finals = layer.into_values().next().expect("all agents moved");
    let orderings: u128 = finals.values().sum();
    let mut probs = vec![Rational::zero(); m];
    for (w, count) in finals {
        let size = w.count_ones() as u128;
        let share = Rational::new(BigInt::from(count), BigInt::from(orderings * size));
        for (a, p) in probs.iter_mut().enumerate() {
            if w & (1 << a) != 0 {
                *p += &share;
            }
        }
    }
    Lottery::from_vec(probs)
}

/// A rule as a value, for checkers that need to re-run it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Rmec,
    SMec(ScoringVector),
    RankMax,
    RandomDictatorship,
    Rsd,
}

impl Rule {
    /// `rmec | smec | rankmax | rd | rsd`; `smec` needs `scores`.
    pub fn from_name(name: &str, scores: Option<ScoringVector>) -> Result<Self> {
        Ok(match name {
            "rmec" => Rule::Rmec,
            "smec" => Rule::SMec(scores.ok_or_else(|| Error::UnknownRule("smec needs --scores".into()))?),
            "rankmax" => Rule::RankMax,
            "rd" => Rule::RandomDictatorship,
            "rsd" => Rule::Rsd,
            other => return Err(Error::UnknownRule(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Rmec => "rmec",
            Rule::SMec(_) => "smec",
            Rule::RankMax => "rankmax",
            Rule::RandomDictatorship => "rd",
            Rule::Rsd => "rsd",
        }
    }

    pub fn apply(&self, profile: &Profile) -> Result<Lottery> {
        match self {
            Rule::Rmec => Ok(rmec(profile).lottery),
            Rule::SMec(s) => Ok(s_mec(profile, s)?.lottery),
            Rule::RankMax => Ok(rank_maximal_rule(profile)),
            Rule::RandomDictatorship => random_dictatorship(profile),
            Rule::Rsd => rsd(profile),
        }
    }
}
