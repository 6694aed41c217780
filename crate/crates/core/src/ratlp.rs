//! Exact linear programming.
//!
//! Dense two-phase simplex with Bland's rule. The tableau is first run over
//! `i128` fractions with checked arithmetic; if any operation overflows the
//! whole solve restarts over arbitrary-precision rationals, so the result is
//! always exact.

use std::fmt;

use log::{log_enabled, trace, Level};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use crate::lottery::{Lottery, Rational};
use crate::prefs::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to `constraints`, `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        assignment: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize, objective: Vec<Rational>) -> Self {
        assert_eq!(objective.len(), num_vars, "objective length");
        LinearProgram {
            num_vars,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint length");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Whether `x` satisfies every constraint and sign restriction exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }

    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// The dual program, written as a maximisation over non-negative
    /// variables so the same solver applies. Its optimum is the negated
    /// optimum of `self` whenever both are feasible.
    ///
    /// Each primal row `i` gets a dual `y_i` (`>= 0` for `<=`, `<= 0` for
    /// `>=`, free for `=`); free duals are split into two columns and
    /// non-positive ones negated. Use [`LinearProgram::dual_row_values`] to
    /// map an assignment back to `y`.
    pub fn dual(&self) -> LinearProgram {
        let mut columns: Vec<(usize, bool)> = Vec::new();
        for (i, c) in self.constraints.iter().enumerate() {
            match c.relation {
                Relation::Le => columns.push((i, false)),
                Relation::Ge => columns.push((i, true)),
                Relation::Eq => {
                    columns.push((i, false));
                    columns.push((i, true));
                }
            }
        }
        let sign = |neg: bool, v: &Rational| if neg { -v.clone() } else { v.clone() };
        // min b.y  ==  max -b.y
        let objective = columns
            .iter()
            .map(|&(i, neg)| -sign(neg, &self.constraints[i].rhs))
            .collect();
        let mut dual = LinearProgram::new(columns.len(), objective);
        for j in 0..self.num_vars {
            let coeffs = columns
                .iter()
                .map(|&(i, neg)| sign(neg, &self.constraints[i].coeffs[j]))
                .collect();
            dual.add_constraint(coeffs, Relation::Ge, self.objective[j].clone());
        }
        dual
    }

    /// Folds an assignment of [`LinearProgram::dual`] into one value per
    /// primal row.
    pub fn dual_row_values(&self, assignment: &[Rational]) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.constraints.len()];
        let mut k = 0;
        for (i, c) in self.constraints.iter().enumerate() {
            let parts: &[bool] = match c.relation {
                Relation::Le => &[false],
                Relation::Ge => &[true],
                Relation::Eq => &[false, true],
            };
            for &neg in parts {
                if neg {
                    y[i] -= &assignment[k];
                } else {
                    y[i] += &assignment[k];
                }
                k += 1;
            }
        }
        y
    }
}

/// Ordered field operations the tableau needs; `None` signals overflow.
trait Scalar: Clone + PartialOrd + fmt::Display {
    fn nil() -> Self;
    fn unit() -> Self;
    fn is_nil(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn from_big(r: &Rational) -> Option<Self>;
    fn to_big(&self) -> Rational;
}

type Small = Ratio<i128>;

impl Scalar for Small {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        Signed::is_positive(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn from_big(r: &Rational) -> Option<Self> {
        let n = r.numer().to_i128()?;
        let d = r.denom().to_i128()?;
        Some(Ratio::new_raw(n, d))
    }
    fn to_big(&self) -> Rational {
        Rational::new_raw(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

impl Scalar for Rational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        Signed::is_positive(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn from_big(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }
    fn to_big(&self) -> Rational {
        self.clone()
    }
}

struct Overflow;

struct Tableau<T> {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - z_j`; a positive entry may enter.
    reduced: Vec<T>,
    value: T,
    /// Columns that may not enter (artificials in phase two).
    blocked: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, i: usize) -> &T {
        self.rows[i].last().expect("rhs")
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<(), Overflow> {
        let width = self.rows[r].len();
        let piv = self.rows[r][c].clone();
        if !(piv.is_nil() || is_one(&piv)) {
            for j in 0..width {
                if !self.rows[r][j].is_nil() {
                    self.rows[r][j] = self.rows[r][j].div(&piv).ok_or(Overflow)?;
                }
            }
        }
        let nz: Vec<usize> = (0..width).filter(|&j| !self.rows[r][j].is_nil()).collect();
        let (before, rest) = self.rows.split_at_mut(r);
        let (pivot_row, after) = rest.split_first_mut().expect("pivot row");
        for row in before.iter_mut().chain(after.iter_mut()) {
            let f = row[c].clone();
            if f.is_nil() {
                continue;
            }
            for &j in &nz {
                row[j] = row[j].sub(&f.mul(&pivot_row[j]).ok_or(Overflow)?).ok_or(Overflow)?;
            }
        }
        let f = self.reduced[c].clone();
        if !f.is_nil() {
            for &j in &nz {
                if j + 1 == width {
                    self.value = self.value.add(&f.mul(&pivot_row[j]).ok_or(Overflow)?).ok_or(Overflow)?;
                } else {
                    self.reduced[j] =
                        self.reduced[j].sub(&f.mul(&pivot_row[j]).ok_or(Overflow)?).ok_or(Overflow)?;
                }
            }
        }
        self.basis[r] = c;
        Ok(())
    }

    /// Runs Bland's rule until optimal or unbounded.
    fn optimize(&mut self) -> Result<Step, Overflow> {
        loop {
            let entering = (0..self.reduced.len())
                .find(|&j| !self.blocked[j] && self.reduced[j].is_pos());
            let Some(c) = entering else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs(i).div(a).ok_or(Overflow)?;
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Step::Unbounded);
            };
            self.pivot(r, c)?;
            if log_enabled!(Level::Trace) {
                trace!("pivot row {r} col {c}\n{}", self.dump());
            }
        }
    }

    fn dump(&self) -> String {
        let mut s = String::new();
        for (row, b) in self.rows.iter().zip(&self.basis) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("x{b:<3}| {}\n", cells.join(" ")));
        }
        let cells: Vec<String> = self.reduced.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("d   | {} | {}\n", cells.join(" "), self.value));
        s
    }
}

fn is_one<T: Scalar>(v: &T) -> bool {
    *v == T::unit()
}

fn solve_with<T: Scalar>(lp: &LinearProgram) -> Result<LpOutcome, Overflow> {
    let n = lp.num_vars;
    let conv = |r: &Rational| T::from_big(r).ok_or(Overflow);

    // normalise to non-negative right-hand sides
    let mut rows_src: Vec<(Vec<T>, Relation, T)> = Vec::with_capacity(lp.constraints.len());
    for c in &lp.constraints {
        let flip = c.rhs.is_negative();
        let mut coeffs = Vec::with_capacity(n);
        for a in &c.coeffs {
            coeffs.push(conv(&if flip { -a.clone() } else { a.clone() })?);
        }
        let rhs = conv(&if flip { -c.rhs.clone() } else { c.rhs.clone() })?;
        let rel = match (c.relation, flip) {
            (r, false) => r,
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (Relation::Eq, true) => Relation::Eq,
        };
        rows_src.push((coeffs, rel, rhs));
    }

    let num_slack = rows_src.iter().filter(|r| r.1 != Relation::Eq).count();
    let num_art = rows_src.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + num_slack + num_art;
    let first_art = n + num_slack;

    let mut rows = Vec::with_capacity(rows_src.len());
    let mut basis = Vec::with_capacity(rows_src.len());
    let mut is_art_row = Vec::with_capacity(rows_src.len());
    let (mut s, mut a) = (n, first_art);
    for (coeffs, rel, rhs) in rows_src {
        let mut row = coeffs;
        row.resize(width + 1, T::nil());
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[s] = T::unit();
                basis.push(s);
                s += 1;
                is_art_row.push(false);
            }
            Relation::Ge => {
                row[s] = T::nil().sub(&T::unit()).ok_or(Overflow)?;
                s += 1;
                row[a] = T::unit();
                basis.push(a);
                a += 1;
                is_art_row.push(true);
            }
            Relation::Eq => {
                row[a] = T::unit();
                basis.push(a);
                a += 1;
                is_art_row.push(true);
            }
        }
        rows.push(row);
    }

    // phase one: maximise -(sum of artificials)
    let mut reduced = vec![T::nil(); width];
    let mut value = T::nil();
    for (row, &art) in rows.iter().zip(&is_art_row) {
        if !art {
            continue;
        }
        for j in 0..first_art {
            if !row[j].is_nil() {
                reduced[j] = reduced[j].add(&row[j]).ok_or(Overflow)?;
            }
        }
        value = value.sub(&row[width]).ok_or(Overflow)?;
    }
    let mut tab = Tableau {
        rows,
        basis,
        reduced,
        value,
        blocked: vec![false; width],
    };
    if num_art > 0 {
        tab.optimize()?;
        if !tab.value.is_nil() {
            return Ok(LpOutcome::Infeasible);
        }
        // drive zero-level artificials out of the basis
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= first_art {
                match (0..first_art).find(|&j| !tab.rows[i][j].is_nil()) {
                    Some(j) => tab.pivot(i, j)?,
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // phase two
    for j in first_art..width {
        tab.blocked[j] = true;
    }
    let cost = |j: usize| -> Result<T, Overflow> {
        if j < n {
            conv(&lp.objective[j])
        } else {
            Ok(T::nil())
        }
    };
    let mut reduced = Vec::with_capacity(width);
    for j in 0..width {
        reduced.push(cost(j)?);
    }
    let mut value = T::nil();
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        let cb = cost(b)?;
        if cb.is_nil() {
            continue;
        }
        for j in 0..width {
            if !row[j].is_nil() {
                reduced[j] = reduced[j].sub(&cb.mul(&row[j]).ok_or(Overflow)?).ok_or(Overflow)?;
            }
        }
        value = value.add(&cb.mul(&row[width]).ok_or(Overflow)?).ok_or(Overflow)?;
    }
    tab.reduced = reduced;
    tab.value = value;
    match tab.optimize()? {
        Step::Unbounded => Ok(LpOutcome::Unbounded),
        Step::Optimal => {
            let mut assignment = vec![<Rational as Zero>::zero(); n];
            for (row, &b) in tab.rows.iter().zip(&tab.basis) {
                if b < n {
                    assignment[b] = row[width].to_big();
                }
            }
            Ok(LpOutcome::Optimal {
                value: tab.value.to_big(),
                assignment,
            })
        }
    }
}

/// Solves `lp` exactly.
pub fn solve_lp(lp: &LinearProgram) -> LpOutcome {
    match solve_with::<Small>(lp) {
        Ok(out) => out,
        Err(Overflow) => {
            trace!("i128 tableau overflowed; retrying with big rationals");
            match solve_with::<Rational>(lp) {
                Ok(out) => out,
                Err(Overflow) => unreachable!("big rationals do not overflow"),
            }
        }
    }
}

/// LP whose optimum is positive iff some lottery SD-dominates `p` for every
/// agent of `profile` (strictly for one).
///
/// Variables: `q(a)` for each alternative (the first `m` columns), then one
/// slack `e(i,c)` per agent `i` and non-last class threshold `c`, agent by
/// agent. Rows: `Σ q = 1` and `q(E_i^1 ∪ .. ∪ E_i^c) - e(i,c) = p(same)`.
/// The objective is `Σ e(i,c)`.
pub fn build_sd_dominance_lp(p: &Lottery, profile: &Profile) -> LinearProgram {
    let m = profile.num_alternatives();
    let thresholds: usize = profile.orders().iter().map(|o| o.num_classes() - 1).sum();
    let num_vars = m + thresholds;
    let mut objective = vec![Rational::zero(); num_vars];
    for v in &mut objective[m..] {
        *v = Rational::one();
    }
    let mut lp = LinearProgram::new(num_vars, objective);
    let mut all = vec![Rational::zero(); num_vars];
    for v in &mut all[..m] {
        *v = Rational::one();
    }
    lp.add_constraint(all, Relation::Eq, Rational::one());
    let mut slack = m;
    for order in profile.orders() {
        let mut prefix = vec![Rational::zero(); num_vars];
        let mut mass = Rational::zero();
        let k = order.num_classes();
        for class in &order.classes()[..k - 1] {
            for &a in class {
                prefix[a] = Rational::one();
            }
            mass += p.mass(class);
            let mut coeffs = prefix.clone();
            coeffs[slack] = -Rational::one();
            lp.add_constraint(coeffs, Relation::Eq, mass.clone());
            slack += 1;
        }
    }
    lp
}
