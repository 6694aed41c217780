//! Weak-order preferences and profiles.
//!
//! A [`WeakOrder`] is an ordered partition of the alternatives `0..m` into
//! indifference classes, best class first. Class members are kept sorted by
//! id so that two orders are equal exactly when they rank every pair the same
//! way.
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! alternatives: a b c d
//! 1: a,b > c > d
//! 2: d > a,b,c
//! ```

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alternative {
    pub id: usize,
    pub label: String,
}

/// Ordered partition of `0..m` into non-empty indifference classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeakOrder {
    classes: Vec<Vec<usize>>,
    // 0-based class of each alternative
    position: Vec<usize>,
}

impl WeakOrder {
    /// Builds an order over `0..m` from its classes, best first.
    pub fn new(m: usize, classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut position = vec![usize::MAX; m];
        let mut classes = classes;
        for (j, class) in classes.iter_mut().enumerate() {
            if class.is_empty() {
                return Err(Error::EmptyClass);
            }
            class.sort_unstable();
            for &a in class.iter() {
                if a >= m {
                    return Err(Error::NotInUniverse(a));
                }
                if position[a] != usize::MAX {
                    return Err(Error::DuplicateAlternative(a.to_string()));
                }
                position[a] = j;
            }
        }
        if let Some(a) = position.iter().position(|&p| p == usize::MAX) {
            return Err(Error::MissingAlternative(a.to_string()));
        }
        Ok(WeakOrder { classes, position })
    }

    /// Strict linear order listing alternatives from best to worst.
    pub fn strict(ranking: &[usize]) -> Result<Self> {
        Self::new(ranking.len(), ranking.iter().map(|&a| vec![a]).collect())
    }

    /// Everything in a single class.
    pub fn indifferent(m: usize) -> Self {
        Self::new(m, vec![(0..m).collect()]).expect("single class is valid")
    }

    /// Builds an order from per-alternative 0-based class indices. The
    /// indices must cover `0..k` for some `k`.
    pub fn from_positions(position: &[usize]) -> Result<Self> {
        let k = position.iter().map(|&p| p + 1).max().unwrap_or(0);
        let mut classes = vec![Vec::new(); k];
        for (a, &p) in position.iter().enumerate() {
            classes[p].push(a);
        }
        Self::new(position.len(), classes)
    }

    pub fn num_alternatives(&self) -> usize {
        self.position.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class(&self, j: usize) -> &[usize] {
        &self.classes[j]
    }

    pub fn first_class(&self) -> &[usize] {
        &self.classes[0]
    }

    /// 0-based class of every alternative.
    pub fn positions(&self) -> &[usize] {
        &self.position
    }

    pub fn is_strict(&self) -> bool {
        self.classes.len() == self.position.len()
    }

    /// At most two classes (approved / not approved).
    pub fn is_dichotomous(&self) -> bool {
        self.classes.len() <= 2
    }

    /// 1-based rank position of the class containing `a`.
    pub fn class_index(&self, a: usize) -> Result<usize> {
        self.position
            .get(a)
            .map(|&j| j + 1)
            .ok_or(Error::NotInUniverse(a))
    }

    /// `a` is weakly preferred to `b`.
    pub fn weakly_prefers(&self, a: usize, b: usize) -> bool {
        self.position[a] <= self.position[b]
    }

    pub fn strictly_prefers(&self, a: usize, b: usize) -> bool {
        self.position[a] < self.position[b]
    }

    /// Most preferred members of `set`: its intersection with the best class
    /// that meets it.
    pub fn max_within(&self, set: &[usize]) -> Result<Vec<usize>> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut best = usize::MAX;
        for &a in set {
            let j = *self.position.get(a).ok_or(Error::NotInUniverse(a))?;
            best = best.min(j);
        }
        let mut out: Vec<usize> = set
            .iter()
            .copied()
            .filter(|&a| self.position[a] == best)
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Every single-step promotion of `a`: split it out of a shared class
    /// into a singleton directly above, or merge it into the class above.
    pub fn reinforcements(&self, a: usize) -> Result<Vec<WeakOrder>> {
        let j = *self.position.get(a).ok_or(Error::NotInUniverse(a))?;
        let m = self.num_alternatives();
        let mut out = Vec::new();
        if self.classes[j].len() >= 2 {
            let mut classes = Vec::with_capacity(self.classes.len() + 1);
            classes.extend_from_slice(&self.classes[..j]);
            classes.push(vec![a]);
            classes.push(self.classes[j].iter().copied().filter(|&b| b != a).collect());
            classes.extend_from_slice(&self.classes[j + 1..]);
            out.push(WeakOrder::new(m, classes)?);
        }
        if j > 0 {
            let mut classes = self.classes.clone();
            classes[j].retain(|&b| b != a);
            classes[j - 1].push(a);
            if classes[j].is_empty() {
                classes.remove(j);
            }
            out.push(WeakOrder::new(m, classes)?);
        }
        Ok(out)
    }

    /// Applies `map` (old id -> new id) to every alternative.
    pub fn relabel(&self, map: &[usize]) -> Result<Self> {
        let classes = self
            .classes
            .iter()
            .map(|c| c.iter().map(|&a| map[a]).collect())
            .collect();
        Self::new(self.num_alternatives(), classes)
    }

    /// Renders the order with the given labels, e.g. `a,b > c`.
    pub fn display<'a>(&'a self, labels: &'a [String]) -> impl fmt::Display + 'a {
        DisplayOrder {
            order: self,
            labels,
        }
    }
}

struct DisplayOrder<'a> {
    order: &'a WeakOrder,
    labels: &'a [String],
}

impl fmt::Display for DisplayOrder<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, class) in self.order.classes.iter().enumerate() {
            if j > 0 {
                f.write_str(" > ")?;
            }
            for (t, &a) in class.iter().enumerate() {
                if t > 0 {
                    f.write_str(",")?;
                }
                f.write_str(&self.labels[a])?;
            }
        }
        Ok(())
    }
}

/// Default labels: `a`..`z`, then `a26`, `a27`, ...
pub fn default_labels(m: usize) -> Vec<String> {
    (0..m)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("a{i}")
            }
        })
        .collect()
}

/// Weak orders of `n` agents over a shared set of alternatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    alternatives: Vec<Alternative>,
    agents: Vec<String>,
    orders: Vec<WeakOrder>,
}

impl Profile {
    pub fn new(labels: Vec<String>, agents: Vec<String>, orders: Vec<WeakOrder>) -> Result<Self> {
        if labels.is_empty() || orders.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if agents.len() != orders.len() {
            return Err(Error::LengthMismatch(agents.len(), orders.len()));
        }
        let m = labels.len();
        let mut seen = HashMap::new();
        for l in &labels {
            if seen.insert(l.as_str(), ()).is_some() {
                return Err(Error::DuplicateAlternative(l.clone()));
            }
        }
        for o in &orders {
            if o.num_alternatives() != m {
                return Err(Error::UniverseMismatch(o.num_alternatives(), m));
            }
        }
        let alternatives = labels
            .into_iter()
            .enumerate()
            .map(|(id, label)| Alternative { id, label })
            .collect();
        Ok(Profile {
            alternatives,
            agents,
            orders,
        })
    }

    /// Profile with default labels and agents named `1..=n`.
    pub fn from_orders(orders: Vec<WeakOrder>) -> Result<Self> {
        let m = orders.first().map_or(0, WeakOrder::num_alternatives);
        let agents = (1..=orders.len()).map(|i| i.to_string()).collect();
        Self::new(default_labels(m), agents, orders)
    }

    /// Parses agent lines (without names) over the given labels.
    pub fn from_lines(labels: &[&str], lines: &[&str]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let index = label_index(&labels);
        let orders = lines
            .iter()
            .enumerate()
            .map(|(i, l)| parse_order(l, &index, labels.len()).map_err(|e| at_line(e, i + 1)))
            .collect::<Result<Vec<_>>>()?;
        let agents = (1..=orders.len()).map(|i| i.to_string()).collect();
        Self::new(labels, agents, orders)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut labels: Option<Vec<String>> = None;
        let mut index = HashMap::new();
        let mut agents = Vec::new();
        let mut orders = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, body) = line.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                msg: "expected `name: ...`".into(),
            })?;
            let head = head.trim();
            match &labels {
                None => {
                    if head != "alternatives" {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: "first line must be `alternatives: ...`".into(),
                        });
                    }
                    let ls: Vec<String> = body.split_whitespace().map(str::to_string).collect();
                    index = label_index(&ls);
                    if index.len() != ls.len() {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: "duplicate alternative label".into(),
                        });
                    }
                    labels = Some(ls);
                }
                Some(ls) => {
                    let order =
                        parse_order(body, &index, ls.len()).map_err(|e| at_line(e, lineno))?;
                    agents.push(head.to_string());
                    orders.push(order);
                }
            }
        }
        let labels = labels.ok_or(Error::Parse {
            line: 0,
            msg: "missing `alternatives:` line".into(),
        })?;
        Self::new(labels, agents, orders)
    }

    /// Parses a single order (e.g. `a,b > c`) against this profile's labels.
    pub fn parse_order(&self, text: &str) -> Result<WeakOrder> {
        let labels = self.labels();
        parse_order(text, &label_index(&labels), labels.len())
    }

    pub fn num_agents(&self) -> usize {
        self.orders.len()
    }

    pub fn num_alternatives(&self) -> usize {
        self.alternatives.len()
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    pub fn labels(&self) -> Vec<String> {
        self.alternatives.iter().map(|a| a.label.clone()).collect()
    }

    pub fn label(&self, a: usize) -> &str {
        &self.alternatives[a].label
    }

    pub fn alternative_id(&self, label: &str) -> Result<usize> {
        self.alternatives
            .iter()
            .position(|a| a.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn orders(&self) -> &[WeakOrder] {
        &self.orders
    }

    pub fn order(&self, i: usize) -> &WeakOrder {
        &self.orders[i]
    }

    pub fn is_strict(&self) -> bool {
        self.orders.iter().all(WeakOrder::is_strict)
    }

    /// The profile without agent `i`.
    pub fn drop_agent(&self, i: usize) -> Result<Profile> {
        if i >= self.num_agents() {
            return Err(Error::NoSuchAgent(i));
        }
        if self.num_agents() == 1 {
            return Err(Error::EmptyElectorate);
        }
        let mut out = self.clone();
        out.agents.remove(i);
        out.orders.remove(i);
        Ok(out)
    }

    /// Inserts an agent at position `i`.
    pub fn insert_agent(&self, i: usize, name: &str, order: WeakOrder) -> Result<Profile> {
        if i > self.num_agents() {
            return Err(Error::NoSuchAgent(i));
        }
        if order.num_alternatives() != self.num_alternatives() {
            return Err(Error::UniverseMismatch(
                order.num_alternatives(),
                self.num_alternatives(),
            ));
        }
        let mut out = self.clone();
        out.agents.insert(i, name.to_string());
        out.orders.insert(i, order);
        Ok(out)
    }

    /// Replaces agent `i`'s order, e.g. with a misreport.
    pub fn with_order(&self, i: usize, order: WeakOrder) -> Result<Profile> {
        if i >= self.num_agents() {
            return Err(Error::NoSuchAgent(i));
        }
        if order.num_alternatives() != self.num_alternatives() {
            return Err(Error::UniverseMismatch(
                order.num_alternatives(),
                self.num_alternatives(),
            ));
        }
        let mut out = self.clone();
        out.orders[i] = order;
        Ok(out)
    }

    /// Reorders agents: agent `perm[k]` of `self` becomes agent `k`.
    pub fn permute_agents(&self, perm: &[usize]) -> Result<Profile> {
        check_permutation(perm, self.num_agents())?;
        let mut out = self.clone();
        out.agents = perm.iter().map(|&i| self.agents[i].clone()).collect();
        out.orders = perm.iter().map(|&i| self.orders[i].clone()).collect();
        Ok(out)
    }

    /// Renames alternatives: old id `a` becomes `map[a]`. Labels move with
    /// their alternatives.
    pub fn relabel_alternatives(&self, map: &[usize]) -> Result<Profile> {
        let m = self.num_alternatives();
        check_permutation(map, m)?;
        let mut labels = vec![String::new(); m];
        for (a, &b) in map.iter().enumerate() {
            labels[b] = self.alternatives[a].label.clone();
        }
        let orders = self
            .orders
            .iter()
            .map(|o| o.relabel(map))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(labels, self.agents.clone(), orders)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(n));
    }
    for &i in perm {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidPermutation(n));
        }
    }
    Ok(())
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = self.labels();
        writeln!(f, "alternatives: {}", labels.join(" "))?;
        for (name, order) in self.agents.iter().zip(&self.orders) {
            writeln!(f, "{}: {}", name, order.display(&labels))?;
        }
        Ok(())
    }
}

fn label_index(labels: &[String]) -> HashMap<String, usize> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), i))
        .collect()
}

fn at_line(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            msg: other.to_string(),
        },
    }
}

fn parse_order(text: &str, index: &HashMap<String, usize>, m: usize) -> Result<WeakOrder> {
    let mut classes = Vec::new();
    let mut seen = vec![false; m];
    for part in text.split('>') {
        let mut class = Vec::new();
        for label in part.split(',') {
            let label = label.trim();
            if label.is_empty() {
                continue;
            }
            let &a = index
                .get(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::DuplicateAlternative(label.to_string()));
            }
            class.push(a);
        }
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        classes.push(class);
    }
    if let Some(a) = seen.iter().position(|&s| !s) {
        let label = index
            .iter()
            .find(|(_, &i)| i == a)
            .map(|(l, _)| l.clone())
            .unwrap_or_default();
        return Err(Error::MissingAlternative(label));
    }
    WeakOrder::new(m, classes)
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut r = 1u128;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Number of words of length `len` over `k` letters that use every one of
/// `missing` designated letters (the rest are unconstrained).
fn completions(len: usize, k: usize, missing: usize) -> Option<u128> {
    // inclusion-exclusion over the designated letters left out
    let mut total: i128 = 0;
    for j in 0..=missing {
        let term = i128::try_from(binomial(missing as u128, j as u128))
            .ok()?
            .checked_mul(i128::try_from((k - j) as u128).ok()?.checked_pow(len as u32)?)?;
        total = if j % 2 == 0 {
            total.checked_add(term)?
        } else {
            total.checked_sub(term)?
        };
    }
    u128::try_from(total).ok()
}

/// Number of weak orders on `m` alternatives with exactly `k` classes.
fn count_with_classes(m: usize, k: usize) -> Option<u128> {
    completions(m, k, k)
}

/// Number of weak orders (ordered set partitions) on `m` alternatives.
pub fn count_weak_orders(m: usize) -> Result<u128> {
    (1..=m.max(1)).try_fold(0u128, |acc, k| {
        count_with_classes(m.max(1), k)
            .and_then(|c| acc.checked_add(c))
            .ok_or(Error::Overflow(m))
    })
}

/// The `index`-th weak order in canonical order: by number of classes `k`,
/// then lexicographically by the class-assignment word (alternative id ->
/// 0-based class) over all surjective words onto `0..k`.
pub fn unrank_weak_order(m: usize, index: u128) -> Result<WeakOrder> {
    let total = count_weak_orders(m)?;
    if index >= total {
        return Err(Error::IndexOutOfRange { index, m });
    }
    let mut rest = index;
    let mut k = 1;
    loop {
        let c = count_with_classes(m, k).ok_or(Error::Overflow(m))?;
        if rest < c {
            break;
        }
        rest -= c;
        k += 1;
    }
    let mut word = Vec::with_capacity(m);
    let mut used = vec![false; k];
    let mut missing = k;
    for t in 0..m {
        for c in 0..k {
            let next_missing = if used[c] { missing } else { missing - 1 };
            let cnt = completions(m - t - 1, k, next_missing).ok_or(Error::Overflow(m))?;
            if rest < cnt {
                word.push(c);
                if !used[c] {
                    used[c] = true;
                    missing -= 1;
                }
                break;
            }
            rest -= cnt;
        }
    }
    WeakOrder::from_positions(&word)
}

/// Inverse of [`unrank_weak_order`].
pub fn rank_weak_order(order: &WeakOrder) -> Result<u128> {
    let m = order.num_alternatives();
    let k = order.num_classes();
    let mut index = 0u128;
    for kk in 1..k {
        index += count_with_classes(m, kk).ok_or(Error::Overflow(m))?;
    }
    let mut used = vec![false; k];
    let mut missing = k;
    for (t, &p) in order.positions().iter().enumerate() {
        for c in 0..p {
            let next_missing = if used[c] { missing } else { missing - 1 };
            index += completions(m - t - 1, k, next_missing).ok_or(Error::Overflow(m))?;
        }
        if !used[p] {
            used[p] = true;
            missing -= 1;
        }
    }
    Ok(index)
}

/// All weak orders on `m` alternatives in canonical order.
pub fn all_weak_orders(m: usize) -> Result<Vec<WeakOrder>> {
    let total = count_weak_orders(m)?;
    (0..total).map(|i| unrank_weak_order(m, i)).collect()
}

/// Random profile with `n` agents, each order drawn uniformly from all weak
/// orders on `m` alternatives.
pub fn sample_profile(n: usize, m: usize, seed: u64) -> Result<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_profile_with(n, m, &mut rng)
}

pub fn sample_profile_with<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Profile> {
    if n == 0 || m == 0 {
        return Err(Error::EmptyProfile);
    }
    let total = count_weak_orders(m)?;
    let orders = (0..n)
        .map(|_| unrank_weak_order(m, rng.gen_range(0..total)))
        .collect::<Result<Vec<_>>>()?;
    Profile::from_orders(orders)
}
