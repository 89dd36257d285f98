//! Exact rational linear programming.
//!
//! Problems have the shape
//!
//! ```text
//! min / max  c·x
//! s.t.       A x = b
//!            G x <= h
//!            x_j >= 0   for NonNegative variables, x_j free otherwise
//! ```
//!
//! and are solved by a two-phase tableau simplex with Bland's pivoting rule,
//! so every run terminates and is deterministic. Every outcome carries a
//! certificate that [`verify_certificate`] re-checks with plain arithmetic,
//! without looking at solver state.
//!
//! Dual conventions, with `y` attached to the equality rows and `z` to the
//! inequality rows:
//!
//! * `Minimize`: `z <= 0` and `c - Aᵀy - Gᵀz >= 0` (`= 0` on free variables);
//!   dual value `b·y + h·z`.
//! * `Maximize`: `z >= 0` and `Aᵀy + Gᵀz - c >= 0` (`= 0` on free variables);
//!   dual value `b·y + h·z`.
//! * Farkas (infeasible): `z >= 0`, `Aᵀy + Gᵀz >= 0` (`= 0` on free
//!   variables) and `b·y + h·z < 0`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{dot, zeros, Rational, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vector,
    pub eq_matrix: Vec<Vector>,
    pub eq_rhs: Vector,
    pub le_matrix: Vec<Vector>,
    pub le_rhs: Vector,
    pub bounds: Vec<Bound>,
}

/// Dual multipliers, one per equality row and one per inequality row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualPoint {
    pub eq: Vector,
    pub le: Vector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        primal: Vector,
        dual: DualPoint,
    },
    Infeasible {
        farkas: DualPoint,
    },
    Unbounded {
        point: Vector,
        ray: Vector,
    },
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::MalformedProblem(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        if self.eq_matrix.len() != self.eq_rhs.len() || self.le_matrix.len() != self.le_rhs.len() {
            return Err(Error::MalformedProblem("row count differs from rhs length".into()));
        }
        if let Some(row) = self
            .eq_matrix
            .iter()
            .chain(&self.le_matrix)
            .find(|r| r.len() != n)
        {
            return Err(Error::MalformedProblem(format!(
                "row of length {} for {} variables",
                row.len(),
                n
            )));
        }
        Ok(())
    }

    /// Dual objective `b·y + h·z`.
    fn dual_value(&self, d: &DualPoint) -> Rational {
        dot(&self.eq_rhs, &d.eq) + dot(&self.le_rhs, &d.le)
    }

    /// `Aᵀy + Gᵀz`
    fn transpose_apply(&self, d: &DualPoint) -> Vector {
        let mut out = zeros(self.num_vars());
        for (row, y) in self.eq_matrix.iter().zip(&d.eq).chain(self.le_matrix.iter().zip(&d.le)) {
            if y.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += y * a;
            }
        }
        out
    }

    fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && self.bounds.iter().zip(x).all(|(b, v)| *b == Bound::Free || !v.is_negative())
            && self.eq_matrix.iter().zip(&self.eq_rhs).all(|(r, b)| dot(r, x) == *b)
            && self.le_matrix.iter().zip(&self.le_rhs).all(|(r, h)| dot(r, x) <= *h)
    }
}

/// Sparse row assembly for [`LpProblem`]s. Variables are appended with
/// [`add_var`](LpBuilder::add_var) and referenced by index in row terms.
#[derive(Debug, Clone)]
pub struct LpBuilder {
    sense: Sense,
    objective: Vector,
    bounds: Vec<Bound>,
    eq: Vec<(Vec<(usize, Rational)>, Rational)>,
    le: Vec<(Vec<(usize, Rational)>, Rational)>,
}

impl LpBuilder {
    pub fn new(sense: Sense) -> Self {
        LpBuilder {
            sense,
            objective: Vec::new(),
            bounds: Vec::new(),
            eq: Vec::new(),
            le: Vec::new(),
        }
    }

    pub fn add_var(&mut self, bound: Bound, cost: Rational) -> usize {
        self.objective.push(cost);
        self.bounds.push(bound);
        self.objective.len() - 1
    }

    /// Appends `count` variables with zero cost.
    pub fn add_vars(&mut self, count: usize, bound: Bound) -> Range<usize> {
        let start = self.objective.len();
        for _ in 0..count {
            self.add_var(bound, Rational::zero());
        }
        start..start + count
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `Σ terms = rhs`, returning the equality row index.
    pub fn add_eq(&mut self, terms: Vec<(usize, Rational)>, rhs: Rational) -> usize {
        self.eq.push((terms, rhs));
        self.eq.len() - 1
    }

    /// Adds `Σ terms <= rhs`, returning the inequality row index.
    pub fn add_le(&mut self, terms: Vec<(usize, Rational)>, rhs: Rational) -> usize {
        self.le.push((terms, rhs));
        self.le.len() - 1
    }

    /// Adds `Σ s_j v_j = rhs` coordinate-wise, one equality row per
    /// coordinate, returning the row range.
    pub fn add_vector_eq<'a, I>(&mut self, terms: I, rhs: &[Rational]) -> Range<usize>
    where
        I: IntoIterator<Item = (usize, Rational, &'a [Rational])>,
    {
        let mut rows: Vec<Vec<(usize, Rational)>> = (0..rhs.len()).map(|_| Vec::new()).collect();
        for (j, s, v) in terms {
            debug_assert_eq!(v.len(), rhs.len());
            for (row, a) in rows.iter_mut().zip(v) {
                if !a.is_zero() {
                    row.push((j, &s * a));
                }
            }
        }
        let start = self.eq.len();
        for (row, b) in rows.into_iter().zip(rhs) {
            self.add_eq(row, b.clone());
        }
        start..self.eq.len()
    }

    pub fn build(self) -> LpProblem {
        let n = self.objective.len();
        let densify = |rows: Vec<(Vec<(usize, Rational)>, Rational)>| {
            let mut mat = Vec::with_capacity(rows.len());
            let mut rhs = Vec::with_capacity(rows.len());
            for (terms, b) in rows {
                let mut row = zeros(n);
                for (j, a) in terms {
                    row[j] += a;
                }
                mat.push(row);
                rhs.push(b);
            }
            (mat, rhs)
        };
        let (eq_matrix, eq_rhs) = densify(self.eq);
        let (le_matrix, le_rhs) = densify(self.le);
        LpProblem {
            sense: self.sense,
            objective: self.objective,
            eq_matrix,
            eq_rhs,
            le_matrix,
            le_rhs,
            bounds: self.bounds,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum RowRef {
    Eq(usize),
    Le(usize),
}

/// `min c·x, A x = b, x >= 0, b >= 0` together with the map back to the
/// caller's problem.
struct StandardForm {
    a: Vec<Vector>,
    b: Vector,
    c: Vector,
    /// Per original variable: (positive column, negative column for free vars).
    var_cols: Vec<(usize, Option<usize>)>,
    /// Per standard row: which original row, and whether it was negated.
    rows: Vec<(RowRef, bool)>,
}

impl StandardForm {
    fn new(p: &LpProblem) -> Self {
        let flip = p.sense == Sense::Maximize;
        let mut var_cols = Vec::with_capacity(p.num_vars());
        let mut ncols = 0;
        for bound in &p.bounds {
            let pos = ncols;
            ncols += 1;
            let neg = match bound {
                Bound::Free => {
                    ncols += 1;
                    Some(pos + 1)
                }
                Bound::NonNegative => None,
            };
            var_cols.push((pos, neg));
        }

        let empty = |r: &Vector| r.iter().all(Zero::is_zero);
        let mut kept: Vec<RowRef> = Vec::new();
        for (i, r) in p.eq_matrix.iter().enumerate() {
            if !(empty(r) && p.eq_rhs[i].is_zero()) {
                kept.push(RowRef::Eq(i));
            }
        }
        let mut slack_of = Vec::new();
        for (i, r) in p.le_matrix.iter().enumerate() {
            if !(empty(r) && !p.le_rhs[i].is_negative()) {
                kept.push(RowRef::Le(i));
                slack_of.push(ncols);
                ncols += 1;
            }
        }

        let mut c = zeros(ncols);
        for (j, &(pos, neg)) in var_cols.iter().enumerate() {
            let cj = if flip { -&p.objective[j] } else { p.objective[j].clone() };
            if let Some(neg) = neg {
                c[neg] = -&cj;
            }
            c[pos] = cj;
        }

        let mut a = Vec::with_capacity(kept.len());
        let mut b = Vec::with_capacity(kept.len());
        let mut rows = Vec::with_capacity(kept.len());
        let mut slack_iter = slack_of.into_iter();
        for rr in kept {
            let (src, rhs, slack) = match rr {
                RowRef::Eq(i) => (&p.eq_matrix[i], &p.eq_rhs[i], None),
                RowRef::Le(i) => (&p.le_matrix[i], &p.le_rhs[i], slack_iter.next()),
            };
            let mut row = zeros(ncols);
            for (j, &(pos, neg)) in var_cols.iter().enumerate() {
                if let Some(neg) = neg {
                    row[neg] = -&src[j];
                }
                row[pos] = src[j].clone();
            }
            if let Some(s) = slack {
                row[s] = Rational::from_integer(1.into());
            }
            let negate = rhs.is_negative();
            if negate {
                for x in row.iter_mut() {
                    *x = -&*x;
                }
            }
            b.push(if negate { -rhs } else { rhs.clone() });
            a.push(row);
            rows.push((rr, negate));
        }
        StandardForm { a, b, c, var_cols, rows }
    }

    fn original_point(&self, x: &[Rational]) -> Vector {
        self.var_cols
            .iter()
            .map(|&(pos, neg)| match neg {
                Some(neg) => &x[pos] - &x[neg],
                None => x[pos].clone(),
            })
            .collect()
    }

    /// Maps standard-row multipliers back onto the original rows.
    fn original_dual(&self, p: &LpProblem, y: &[Rational], negate_all: bool) -> DualPoint {
        let mut d = DualPoint {
            eq: zeros(p.eq_rhs.len()),
            le: zeros(p.le_rhs.len()),
        };
        for (&(rr, negated), yi) in self.rows.iter().zip(y) {
            let v = if negated != negate_all { -yi } else { yi.clone() };
            match rr {
                RowRef::Eq(i) => d.eq[i] = v,
                RowRef::Le(i) => d.le[i] = v,
            }
        }
        d
    }
}

enum StdResult {
    Optimal { x: Vector, y: Vector },
    Infeasible { y: Vector },
    Unbounded { x: Vector, ray: Vector },
}

/// Dense tableau `[B⁻¹A | B⁻¹]` with reduced-cost row. The trailing identity
/// block starts as the artificial basis, so it always holds `B⁻¹`.
struct Tableau {
    t: Vec<Vector>,
    rhs: Vector,
    basis: Vec<usize>,
    n: usize,
    obj: Vector,
    obj_rhs: Rational,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let m = sf.a.len();
        let n = sf.c.len();
        let one = Rational::from_integer(1.into());
        let t = sf
            .a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..m).map(|k| if k == i { one.clone() } else { Rational::zero() }));
                r
            })
            .collect();
        Tableau {
            t,
            rhs: sf.b.clone(),
            basis: (n..n + m).collect(),
            n,
            obj: zeros(n + m),
            obj_rhs: Rational::zero(),
        }
    }

    fn m(&self) -> usize {
        self.t.len()
    }

    /// Resets the reduced-cost row for costs `cost` over all columns.
    fn price(&mut self, cost: &[Rational]) {
        self.obj = cost.to_vec();
        self.obj_rhs = Rational::zero();
        for i in 0..self.m() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (o, a) in self.obj.iter_mut().zip(&self.t[i]) {
                *o -= cb * a;
            }
            self.obj_rhs -= cb * &self.rhs[i];
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let piv = self.t[r][e].clone();
        for x in self.t[r].iter_mut() {
            *x /= &piv;
        }
        self.rhs[r] /= &piv;
        let (pivot_row, pivot_rhs) = (self.t[r].clone(), self.rhs[r].clone());
        for i in 0..self.m() {
            if i == r || self.t[i][e].is_zero() {
                continue;
            }
            let f = self.t[i][e].clone();
            for (x, p) in self.t[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !self.obj[e].is_zero() {
            let f = self.obj[e].clone();
            for (x, p) in self.obj.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            self.obj_rhs -= &f * &pivot_rhs;
        }
        self.basis[r] = e;
    }

    /// Runs Bland-rule simplex over structural columns. Returns the entering
    /// column of an unbounded direction, if any.
    fn optimize(&mut self) -> Option<usize> {
        loop {
            let Some(e) = (0..self.n).find(|&j| self.obj[j].is_negative()) else {
                return None;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.m() {
                let a = &self.t[i][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, e),
                None => return Some(e),
            }
        }
    }

    fn basic_solution(&self) -> Vector {
        let mut x = zeros(self.n);
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    /// `c_Bᵀ B⁻¹`
    fn multipliers(&self, cost: &[Rational]) -> Vector {
        let m = self.m();
        let mut y = zeros(m);
        for i in 0..m {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (k, yk) in y.iter_mut().enumerate() {
                *yk += cb * &self.t[i][self.n + k];
            }
        }
        y
    }
}

fn solve_standard(sf: &StandardForm) -> StdResult {
    let m = sf.a.len();
    let n = sf.c.len();
    let mut tab = Tableau::new(sf);

    // Phase 1: minimize the sum of artificials.
    let mut cost1 = zeros(n + m);
    for c in cost1.iter_mut().skip(n) {
        *c = Rational::from_integer(1.into());
    }
    tab.price(&cost1);
    // Phase 1 is bounded below by zero.
    let _ = tab.optimize();
    if tab.obj_rhs.is_negative() {
        let y = tab.multipliers(&cost1);
        return StdResult::Infeasible {
            y: y.into_iter().map(|v| -v).collect(),
        };
    }

    // Drive zero-level artificials out; rows where that is impossible are
    // redundant and keep their artificial at zero forever.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(e) = (0..n).find(|&j| !tab.t[r][j].is_zero()) {
                tab.pivot(r, e);
            }
        }
    }

    let mut cost2 = sf.c.clone();
    cost2.extend((0..m).map(|_| Rational::zero()));
    tab.price(&cost2);
    match tab.optimize() {
        None => StdResult::Optimal {
            x: tab.basic_solution(),
            y: tab.multipliers(&cost2),
        },
        Some(e) => {
            let x = tab.basic_solution();
            let mut ray = zeros(n);
            ray[e] = Rational::from_integer(1.into());
            for (i, &b) in tab.basis.iter().enumerate() {
                if b < n {
                    ray[b] = -&tab.t[i][e];
                }
            }
            StdResult::Unbounded { x, ray }
        }
    }
}

/// Solves `p` exactly.
pub fn solve(p: &LpProblem) -> Result<LpOutcome> {
    p.check()?;
    let sf = StandardForm::new(p);
    let maximize = p.sense == Sense::Maximize;
    Ok(match solve_standard(&sf) {
        StdResult::Optimal { x, y } => {
            let primal = sf.original_point(&x);
            let value = dot(&p.objective, &primal);
            let dual = sf.original_dual(p, &y, maximize);
            LpOutcome::Optimal { value, primal, dual }
        }
        StdResult::Infeasible { y } => LpOutcome::Infeasible {
            farkas: sf.original_dual(p, &y, false),
        },
        StdResult::Unbounded { x, ray } => LpOutcome::Unbounded {
            point: sf.original_point(&x),
            ray: sf.original_point(&ray),
        },
    })
}

/// Re-checks every condition of `o` against `p` by direct arithmetic.
pub fn verify_certificate(p: &LpProblem, o: &LpOutcome) -> bool {
    if p.check().is_err() {
        return false;
    }
    let n = p.num_vars();
    let dual_shape_ok =
        |d: &DualPoint| d.eq.len() == p.eq_rhs.len() && d.le.len() == p.le_rhs.len();
    match o {
        LpOutcome::Optimal { value, primal, dual } => {
            if !p.is_feasible(primal) || !dual_shape_ok(dual) || dot(&p.objective, primal) != *value {
                return false;
            }
            let aty = p.transpose_apply(dual);
            let (z_ok, slack_ok) = match p.sense {
                Sense::Minimize => (
                    dual.le.iter().all(|z| !z.is_positive()),
                    p.objective.iter().zip(&aty).zip(&p.bounds).all(|((c, a), b)| {
                        let s = c - a;
                        match b {
                            Bound::NonNegative => !s.is_negative(),
                            Bound::Free => s.is_zero(),
                        }
                    }),
                ),
                Sense::Maximize => (
                    dual.le.iter().all(|z| !z.is_negative()),
                    p.objective.iter().zip(&aty).zip(&p.bounds).all(|((c, a), b)| {
                        let s = a - c;
                        match b {
                            Bound::NonNegative => !s.is_negative(),
                            Bound::Free => s.is_zero(),
                        }
                    }),
                ),
            };
            z_ok && slack_ok && p.dual_value(dual) == *value
        }
        LpOutcome::Infeasible { farkas } => {
            if !dual_shape_ok(farkas) || farkas.le.iter().any(Signed::is_negative) {
                return false;
            }
            let aty = p.transpose_apply(farkas);
            aty.iter().zip(&p.bounds).all(|(a, b)| match b {
                Bound::NonNegative => !a.is_negative(),
                Bound::Free => a.is_zero(),
            }) && p.dual_value(farkas).is_negative()
        }
        LpOutcome::Unbounded { point, ray } => {
            if !p.is_feasible(point) || ray.len() != n {
                return false;
            }
            let ray_ok = p.bounds.iter().zip(ray).all(|(b, d)| *b == Bound::Free || !d.is_negative())
                && p.eq_matrix.iter().all(|r| dot(r, ray).is_zero())
                && p.le_matrix.iter().all(|r| !dot(r, ray).is_positive());
            let improving = dot(&p.objective, ray);
            ray_ok
                && match p.sense {
                    Sense::Minimize => improving.is_negative(),
                    Sense::Maximize => improving.is_positive(),
                }
        }
    }
}
