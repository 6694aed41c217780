//! Exact lotteries over alternatives and stochastic dominance.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::prefs::{Profile, WeakOrder};

pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p`, `p/q` or a decimal literal such as `0.25`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().ok()?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let f: BigInt = frac.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let f = Rational::new(f, scale);
        let w = Rational::from_integer(w);
        return Some(if neg { w - f } else { w + f });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Probability distribution over the alternatives `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lottery {
    probs: Vec<Rational>,
}

impl Lottery {
    /// Validates `pairs` as a lottery over `m` alternatives. Alternatives not
    /// mentioned get probability zero; repeated ids accumulate.
    pub fn from_pairs(pairs: &[(usize, Rational)], m: usize) -> Result<Self> {
        let mut probs = vec![Rational::zero(); m];
        for (a, p) in pairs {
            if *a >= m {
                return Err(Error::NotInUniverse(*a));
            }
            probs[*a] += p;
        }
        Self::from_vec(probs)
    }

    pub fn from_vec(probs: Vec<Rational>) -> Result<Self> {
        if let Some(a) = probs.iter().position(Signed::is_negative) {
            return Err(Error::NegativeProbability(a));
        }
        let sum: Rational = probs.iter().sum();
        if !sum.is_one() {
            return Err(Error::NotNormalized(format_rational(&sum)));
        }
        Ok(Lottery { probs })
    }

    /// All mass on `a`.
    pub fn degenerate(a: usize, m: usize) -> Self {
        let mut probs = vec![Rational::zero(); m];
        probs[a] = Rational::one();
        Lottery { probs }
    }

    /// Uniform over `set` (non-empty).
    pub fn uniform_over(set: &[usize], m: usize) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let share = Rational::new(BigInt::one(), BigInt::from(set.len()));
        let mut probs = vec![Rational::zero(); m];
        for &a in set {
            if a >= m {
                return Err(Error::NotInUniverse(a));
            }
            probs[a] += &share;
        }
        Self::from_vec(probs)
    }

    pub fn uniform(m: usize) -> Self {
        Self::uniform_over(&(0..m).collect::<Vec<_>>(), m).expect("m >= 1")
    }

    pub fn num_alternatives(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, a: usize) -> &Rational {
        &self.probs[a]
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    /// Total mass on `set`.
    pub fn mass(&self, set: &[usize]) -> Rational {
        set.iter().map(|&a| &self.probs[a]).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len())
            .filter(|&a| self.probs[a].is_positive())
            .collect()
    }

    /// Renames alternatives: old id `a` becomes `map[a]`.
    pub fn relabel(&self, map: &[usize]) -> Lottery {
        let mut probs = vec![Rational::zero(); self.probs.len()];
        for (a, p) in self.probs.iter().enumerate() {
            probs[map[a]] = p.clone();
        }
        Lottery { probs }
    }

    /// JSON object `label -> "num/den"` over the support, by ascending id.
    pub fn to_json(&self, labels: &[String]) -> Value {
        let mut map = Map::new();
        for a in self.support() {
            map.insert(labels[a].clone(), Value::String(format_rational(&self.probs[a])));
        }
        Value::Object(map)
    }

    pub fn display<'a>(&'a self, labels: &'a [String]) -> impl fmt::Display + 'a {
        DisplayLottery {
            lottery: self,
            labels,
        }
    }
}

struct DisplayLottery<'a> {
    lottery: &'a Lottery,
    labels: &'a [String],
}

impl fmt::Display for DisplayLottery<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, a) in self.lottery.support().into_iter().enumerate() {
            if t > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{} {}", self.lottery.probs[a], self.labels[a])?;
        }
        Ok(())
    }
}

/// `Σ_{x ≿ y} p(x)`: mass on the classes up to and including `y`'s.
pub fn upper_contour_mass(p: &Lottery, order: &WeakOrder, y: usize) -> Result<Rational> {
    let j = order.class_index(y)?;
    if p.num_alternatives() != order.num_alternatives() {
        return Err(Error::UniverseMismatch(
            p.num_alternatives(),
            order.num_alternatives(),
        ));
    }
    Ok(order.classes()[..j].iter().map(|c| p.mass(c)).sum())
}

/// Outcome of comparing two lotteries by stochastic dominance for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SdRelation {
    Equal,
    FirstStrict,
    SecondStrict,
    Incomparable,
}

impl SdRelation {
    /// The first lottery is weakly SD-preferred.
    pub fn first_weakly(self) -> bool {
        matches!(self, SdRelation::Equal | SdRelation::FirstStrict)
    }
}

/// Compares `p` and `q` under `order` with one prefix threshold per class.
pub fn sd_compare(p: &Lottery, q: &Lottery, order: &WeakOrder) -> Result<SdRelation> {
    let m = order.num_alternatives();
    if p.num_alternatives() != m || q.num_alternatives() != m {
        return Err(Error::UniverseMismatch(
            p.num_alternatives(),
            q.num_alternatives(),
        ));
    }
    let (mut p_ahead, mut q_ahead) = (false, false);
    let mut pm = Rational::zero();
    let mut qm = Rational::zero();
    // the last threshold is always 1 = 1
    let k = order.num_classes();
    for class in &order.classes()[..k - 1] {
        pm += p.mass(class);
        qm += q.mass(class);
        match pm.cmp(&qm) {
            Ordering::Greater => p_ahead = true,
            Ordering::Less => q_ahead = true,
            Ordering::Equal => {}
        }
    }
    Ok(match (p_ahead, q_ahead) {
        (false, false) => SdRelation::Equal,
        (true, false) => SdRelation::FirstStrict,
        (false, true) => SdRelation::SecondStrict,
        (true, true) => SdRelation::Incomparable,
    })
}

/// Whether some lottery is strictly SD-preferred to `p`, i.e. `p` leaves
/// mass outside the agent's first class.
pub fn exists_strict_sd_improvement(p: &Lottery, order: &WeakOrder) -> bool {
    !p.mass(order.first_class()).is_one()
}

/// Convex combination of lotteries.
pub fn mix(entries: &[(Rational, Lottery)]) -> Result<Lottery> {
    let m = match entries.first() {
        Some((_, l)) => l.num_alternatives(),
        None => return Err(Error::NotNormalized("0".into())),
    };
    let mut total = Rational::zero();
    let mut probs = vec![Rational::zero(); m];
    for (w, l) in entries {
        if w.is_negative() {
            return Err(Error::NotNormalized(format_rational(w)));
        }
        if l.num_alternatives() != m {
            return Err(Error::UniverseMismatch(l.num_alternatives(), m));
        }
        total += w;
        for (acc, p) in probs.iter_mut().zip(l.probs()) {
            *acc += w * p;
        }
    }
    if !total.is_one() {
        return Err(Error::NotNormalized(format_rational(&total)));
    }
    Ok(Lottery { probs })
}

/// `r_j(p) = Σ_i p(E_i^j)`, zero-padded to length `m`.
pub fn rank_vector_lottery(p: &Lottery, profile: &Profile) -> Result<Vec<Rational>> {
    let m = profile.num_alternatives();
    if p.num_alternatives() != m {
        return Err(Error::UniverseMismatch(p.num_alternatives(), m));
    }
    let mut r = vec![Rational::zero(); m];
    for order in profile.orders() {
        for (j, class) in order.classes().iter().enumerate() {
            r[j] += p.mass(class);
        }
    }
    Ok(r)
}
