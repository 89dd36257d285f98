//! Joint measurability of finite families, discrimination with
//! post-measurement information, and robustness of incompatibility.
//!
//! A family `(M_x)_x` is compatible iff some joint EVM `G` on the product
//! outcome set `Z = ∏_x Y_x` has `Σ_{z: z_x = y} G(z) = M_x(y)` for all
//! `x, y`. A mother measurement followed by post-processings `p_x` folds into
//! such a joint via `G(z) = Σ_w ∏_x p_x(z_x|w) Λ(w)`, so exact margins lose
//! no generality. `G(z) ∈ E_+` is encoded by generator coefficients.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::evm::{check_same_space, Evm};
use crate::gain::{decompose_family, gain_partitioned, Functional, PartitionedEnsemble, WStarFamily};
use crate::lp::{self, verify_certificate, Bound, LpBuilder, LpOutcome, LpProblem, Sense};
use crate::rational::{add_assign, axpy, scale, sub, zeros, Rational, Vector};
use crate::space::GptSpace;

/// Default cap on the number of joint outcomes `|∏_x Y_x|`.
pub const DEFAULT_PRODUCT_LIMIT: usize = 4096;

/// Mixed-radix enumeration of `∏_x Y_x`, first factor most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ProductIndex {
    sizes: Vec<usize>,
    count: usize,
}

impl ProductIndex {
    fn new(sizes: Vec<usize>, limit: usize) -> Result<Self> {
        let count = sizes
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .unwrap_or(usize::MAX);
        if count > limit {
            return Err(Error::ProductTooLarge { size: count, limit });
        }
        Ok(ProductIndex { sizes, count })
    }

    fn tuple(&self, mut z: usize) -> Vec<usize> {
        let mut t = alloc::vec![0; self.sizes.len()];
        for (slot, &n) in t.iter_mut().zip(&self.sizes).rev() {
            *slot = z % n;
            z /= n;
        }
        t
    }
}

fn joint_label(labels: &[&String]) -> String {
    let parts: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    format!("({})", parts.join(","))
}

/// A joint EVM over the product of the family's outcome sets, labeled by
/// tuples `"(y_1,...,y_n)"`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEvm {
    evm: Evm,
    factors: Vec<Vec<String>>,
}

impl JointEvm {
    pub fn evm(&self) -> &Evm {
        &self.evm
    }

    /// Outcome labels of each factor.
    pub fn factors(&self) -> &[Vec<String>] {
        &self.factors
    }

    /// The `x`-th marginal `y ↦ Σ_{z: z_x = y} G(z)`.
    pub fn margin(&self, x: usize) -> Evm {
        let index = ProductIndex {
            sizes: self.factors.iter().map(Vec::len).collect(),
            count: self.evm.len(),
        };
        let margins = margins_of(&index, self.evm.effects(), self.evm.space().dim());
        Evm::from_parts_unchecked(self.evm.space().clone(), self.factors[x].clone(), margins[x].clone())
    }

    /// Every marginal equals the corresponding family member exactly.
    pub fn verify(&self, family: &[Evm]) -> bool {
        self.factors.len() == family.len()
            && self.evm.effects().iter().all(|e| self.evm.space().contains(e).unwrap_or(false))
            && self.evm.effects().iter().fold(zeros(self.evm.space().dim()), |mut acc, e| {
                add_assign(&mut acc, e);
                acc
            }) == *self.evm.space().order_unit()
            && family.iter().enumerate().all(|(x, m)| self.margin(x) == *m)
    }
}

/// `margins[x][y] = Σ_{z: z_x = y} g[z]`
fn margins_of(index: &ProductIndex, g: &[Vector], dim: usize) -> Vec<Vec<Vector>> {
    let mut out: Vec<Vec<Vector>> = index.sizes.iter().map(|&n| alloc::vec![zeros(dim); n]).collect();
    for (z, gz) in g.iter().enumerate().take(index.count) {
        for (x, y) in index.tuple(z).into_iter().enumerate() {
            add_assign(&mut out[x][y], gz);
        }
    }
    out
}

fn check_family(family: &[Evm]) -> Result<()> {
    let first = family.first().ok_or(Error::EmptyList)?;
    family.iter().try_for_each(|m| check_same_space(first, m))
}

/// Generator-coefficient variables for one cone element per joint outcome.
struct JointVars {
    index: ProductIndex,
    ngen: usize,
    start: usize,
}

impl JointVars {
    fn add(lp: &mut LpBuilder, index: ProductIndex, space: &GptSpace, cost: impl Fn(usize, &Vector) -> Rational) -> Self {
        let ngen = space.generators().len();
        let start = lp.num_vars();
        for z in 0..index.count {
            for g in space.generators() {
                lp.add_var(Bound::NonNegative, cost(z, g));
            }
        }
        JointVars { index, ngen, start }
    }

    fn var(&self, z: usize, k: usize) -> usize {
        self.start + z * self.ngen + k
    }

    /// Terms of `Σ_{z: z_x = y} G(z)`.
    fn margin_terms<'a>(&'a self, x: usize, y: usize, space: &'a GptSpace, sign: Rational) -> impl Iterator<Item = (usize, Rational, &'a [Rational])> + 'a {
        (0..self.index.count)
            .filter(move |&z| self.index.tuple(z)[x] == y)
            .flat_map(move |z| {
                let sign = sign.clone();
                space.generators().iter().enumerate().map(move |(k, g)| (self.var(z, k), sign.clone(), g.as_slice()))
            })
    }

    fn all_terms<'a>(&'a self, space: &'a GptSpace, sign: Rational) -> impl Iterator<Item = (usize, Rational, &'a [Rational])> + 'a {
        (0..self.index.count).flat_map(move |z| {
            let sign = sign.clone();
            space.generators().iter().enumerate().map(move |(k, g)| (self.var(z, k), sign.clone(), g.as_slice()))
        })
    }

    fn effects(&self, primal: &[Rational], space: &GptSpace) -> Vec<Vector> {
        (0..self.index.count)
            .map(|z| {
                let mut v = zeros(space.dim());
                for (k, g) in space.generators().iter().enumerate() {
                    axpy(&mut v, &primal[self.var(z, k)], g);
                }
                v
            })
            .collect()
    }
}

fn product_index(family: &[Evm], limit: usize) -> Result<ProductIndex> {
    ProductIndex::new(family.iter().map(Evm::len).collect(), limit)
}

fn joint_labels(index: &ProductIndex, factors: &[Vec<String>]) -> Vec<String> {
    (0..index.count)
        .map(|z| {
            let t = index.tuple(z);
            let ls: Vec<&String> = t.iter().zip(factors).map(|(&y, f)| &f[y]).collect();
            joint_label(&ls)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompatVerdict {
    Compatible(JointEvm),
    /// `gain_partitioned(separator, family) = gain > p_g_comp(separator) = comp`.
    Incompatible {
        separator: PartitionedEnsemble,
        gain: Rational,
        comp: Rational,
    },
}

impl CompatVerdict {
    pub fn is_compatible(&self) -> bool {
        matches!(self, CompatVerdict::Compatible(_))
    }

    pub fn verify(&self, family: &[Evm]) -> bool {
        match self {
            CompatVerdict::Compatible(j) => j.verify(family),
            CompatVerdict::Incompatible { separator, gain, comp } => {
                gain > comp
                    && gain_partitioned(separator, family).is_ok_and(|g| g == *gain)
                    && p_g_comp_bounded(separator, usize::MAX).is_ok_and(|c| c == *comp)
            }
        }
    }
}

pub fn is_compatible(family: &[Evm]) -> Result<CompatVerdict> {
    is_compatible_bounded(family, DEFAULT_PRODUCT_LIMIT)
}

pub fn is_compatible_bounded(family: &[Evm], limit: usize) -> Result<CompatVerdict> {
    check_family(family)?;
    let space = family[0].space().clone();
    let index = product_index(family, limit)?;
    let mut lp = LpBuilder::new(Sense::Minimize);
    let vars = JointVars::add(&mut lp, index.clone(), &space, |_, _| Rational::zero());
    let mut rows: Vec<Vec<Range<usize>>> = Vec::with_capacity(family.len());
    for (x, m) in family.iter().enumerate() {
        rows.push(
            m.effects()
                .iter()
                .enumerate()
                .map(|(y, e)| lp.add_vector_eq(vars.margin_terms(x, y, &space, Rational::one()), e))
                .collect(),
        );
    }
    let factors: Vec<Vec<String>> = family.iter().map(|m| m.labels().to_vec()).collect();
    match lp::solve(&lp.build())? {
        LpOutcome::Optimal { primal, .. } => {
            let labels = joint_labels(&index, &factors);
            let evm = Evm::from_parts_unchecked(space.clone(), labels, vars.effects(&primal, &space));
            Ok(CompatVerdict::Compatible(JointEvm { evm, factors }))
        }
        LpOutcome::Infeasible { farkas } => {
            // ψ = -φ has Σ_x ψ_{x,z_x} <= 0 on E_+ for every z, so its
            // compatible value is <= 0 < Σ_{x,y} ⟨ψ_{x,y}, M_x(y)⟩.
            let psi: Vec<Vec<Functional>> = rows
                .iter()
                .map(|part| part.iter().map(|r| Functional::new(scale(&-Rational::one(), &farkas.eq[r.clone()]))).collect())
                .collect();
            let separator = normalize_parts(&space, &factors, psi)?;
            let gain = gain_partitioned(&separator, family)?;
            let comp = p_g_comp_bounded(&separator, usize::MAX)?;
            Ok(CompatVerdict::Incompatible { separator, gain, comp })
        }
        LpOutcome::Unbounded { .. } => unreachable!("zero objective"),
    }
}

/// One common shift and scale of every functional, which moves both sides
/// of the partitioned discrimination inequality by the same affine map.
fn normalize_parts(space: &alloc::sync::Arc<GptSpace>, factors: &[Vec<String>], psi: Vec<Vec<Functional>>) -> Result<PartitionedEnsemble> {
    let mut labels = Vec::new();
    let mut flat = Vec::new();
    for (x, part) in psi.into_iter().enumerate() {
        for (y, f) in part.into_iter().enumerate() {
            labels.push(format!("{x}:{y}"));
            flat.push(f);
        }
    }
    let dec = decompose_family(space, &WStarFamily::new(labels, flat)?)?;
    let mut normalized = dec.ensemble.family().functionals().iter().cloned();
    let parts = factors
        .iter()
        .map(|ls| WStarFamily::new(ls.clone(), normalized.by_ref().take(ls.len()).collect()))
        .collect::<Result<Vec<_>>>()?;
    PartitionedEnsemble::new(space.clone(), parts)
}

/// Best value of `Σ_x Σ_y ⟨φ_{x,y}, N_x(y)⟩` over compatible families
/// `(N_x)_x` with outcome sets matching the parts.
pub fn p_g_comp(pe: &PartitionedEnsemble) -> Result<Rational> {
    p_g_comp_bounded(pe, DEFAULT_PRODUCT_LIMIT)
}

pub fn p_g_comp_bounded(pe: &PartitionedEnsemble, limit: usize) -> Result<Rational> {
    Ok(p_g_comp_program(pe, limit)?.2.value().expect("bounded").clone())
}

/// The optimal joint EVM realizing [`p_g_comp`].
pub fn p_g_comp_witness(pe: &PartitionedEnsemble, limit: usize) -> Result<(Rational, JointEvm)> {
    let (index, _, outcome) = p_g_comp_program(pe, limit)?;
    let space = pe.space();
    let LpOutcome::Optimal { value, primal, .. } = outcome else {
        unreachable!("u is feasible and the objective is bounded")
    };
    let factors: Vec<Vec<String>> = pe.parts().iter().map(|p| p.labels().to_vec()).collect();
    let vars = JointVars { index: index.clone(), ngen: space.generators().len(), start: 0 };
    let evm = Evm::from_parts_unchecked(space.clone(), joint_labels(&index, &factors), vars.effects(&primal, space));
    Ok((value, JointEvm { evm, factors }))
}

fn p_g_comp_program(pe: &PartitionedEnsemble, limit: usize) -> Result<(ProductIndex, LpProblem, LpOutcome)> {
    let space = pe.space();
    let index = ProductIndex::new(pe.parts().iter().map(WStarFamily::len).collect(), limit)?;
    let mut lp = LpBuilder::new(Sense::Maximize);
    let cost = |z: usize, g: &Vector| {
        index
            .tuple(z)
            .iter()
            .zip(pe.parts())
            .map(|(&y, part)| part.functionals()[y].pair(g))
            .sum()
    };
    let vars = JointVars::add(&mut lp, index.clone(), space, cost);
    lp.add_vector_eq(vars.all_terms(space, Rational::one()), space.order_unit());
    let problem = lp.build();
    let outcome = lp::solve(&problem)?;
    Ok((index, problem, outcome))
}

/// Optimum of the robustness-of-incompatibility program with both
/// certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompReport {
    pub value: Rational,
    pub family: Vec<Evm>,
    /// Sub-normalized joint `G` with `Σ_z G(z) = (1 + R) u` and
    /// `margin_x G - M_x ∈ E_+`, labeled by product tuples.
    pub joint: Vec<Vector>,
    pub joint_labels: Vec<String>,
    /// `N_x = (margin_x G - M_x)/R`, present when `R > 0`.
    pub noise: Option<Vec<Evm>>,
    /// Attained optimum of the finite dual as a partitioned ensemble.
    pub dual_ensemble: PartitionedEnsemble,
    pub primal_problem: LpProblem,
    pub primal_outcome: LpOutcome,
    /// Separately built dual program.
    pub dual_problem: LpProblem,
    pub dual_outcome: LpOutcome,
    pub limit: usize,
}

impl IncompReport {
    pub fn primal_value(&self) -> &Rational {
        self.primal_outcome.value().expect("optimal")
    }

    pub fn dual_value(&self) -> Option<&Rational> {
        self.dual_outcome.value()
    }

    /// `(gain_partitioned(Ē*, family), p_g_comp(Ē*))`, related by
    /// `gain = (1 + R) comp`.
    pub fn dual_gains(&self) -> Result<(Rational, Rational)> {
        Ok((
            gain_partitioned(&self.dual_ensemble, &self.family)?,
            p_g_comp_bounded(&self.dual_ensemble, self.limit)?,
        ))
    }

    /// Re-checks every certificate by direct arithmetic.
    pub fn verify(&self) -> bool {
        let one = Rational::one();
        let Ok(index) = product_index(&self.family, self.limit) else {
            return false;
        };
        let space = self.family[0].space();
        if self.value.is_negative()
            || *self.primal_value() != &self.value + &one
            || !verify_certificate(&self.primal_problem, &self.primal_outcome)
            || !verify_certificate(&self.dual_problem, &self.dual_outcome)
            || self.dual_value() != Some(self.primal_value())
            || self.joint.len() != index.count
        {
            return false;
        }
        if !self.joint.iter().all(|g| space.contains(g).unwrap_or(false)) {
            return false;
        }
        let total = self.joint.iter().fold(zeros(space.dim()), |mut acc, g| {
            add_assign(&mut acc, g);
            acc
        });
        if total != scale(&(&self.value + &one), space.order_unit()) {
            return false;
        }
        let margins = margins_of(&index, &self.joint, space.dim());
        let margins_ok = match &self.noise {
            None => {
                self.value.is_zero()
                    && margins.iter().zip(&self.family).all(|(mx, m)| mx.as_slice() == m.effects())
            }
            Some(noise) => {
                self.value.is_positive()
                    && noise.len() == self.family.len()
                    && noise.iter().zip(&self.family).zip(&margins).all(|((n, m), mx)| {
                        n.labels() == m.labels()
                            && n.effects().iter().all(|e| space.contains(e).unwrap_or(false))
                            && n.effects().iter().zip(m.effects()).zip(mx).all(|((ne, me), g)| {
                                let mut rhs = me.clone();
                                axpy(&mut rhs, &self.value, ne);
                                rhs == *g
                            })
                    })
            }
        };
        margins_ok
            && self
                .dual_gains()
                .is_ok_and(|(g, c)| g == (&self.value + &one) * c)
    }
}

pub fn r_inc(family: &[Evm]) -> Result<IncompReport> {
    r_inc_bounded(family, DEFAULT_PRODUCT_LIMIT)
}

/// Robustness of incompatibility: least `R >= 0` such that
/// `((M_x + R N_x)/(1 + R))_x` is compatible for some measurements `N_x`.
///
/// Primal: minimize `s` over cone-valued `G` with `Σ_z G(z) = s u` and
/// `margin_x G - M_x ∈ E_+`; the optimum is `1 + R`.
pub fn r_inc_bounded(family: &[Evm], limit: usize) -> Result<IncompReport> {
    check_family(family)?;
    let space = family[0].space().clone();
    let gens = space.generators();
    let index = product_index(family, limit)?;
    let mut lp = LpBuilder::new(Sense::Minimize);
    let vars = JointVars::add(&mut lp, index.clone(), &space, |_, _| Rational::zero());
    let s = lp.add_var(Bound::NonNegative, Rational::one());
    let zero = zeros(space.dim());
    let total = core::iter::once((s, Rational::one(), space.order_unit().as_slice()))
        .chain(vars.all_terms(&space, -Rational::one()));
    lp.add_vector_eq(total, &zero);
    let mut rows: Vec<Vec<Range<usize>>> = Vec::with_capacity(family.len());
    for (x, m) in family.iter().enumerate() {
        let mut part = Vec::with_capacity(m.len());
        for (y, e) in m.effects().iter().enumerate() {
            let d = lp.add_vars(gens.len(), Bound::NonNegative);
            let terms = vars
                .margin_terms(x, y, &space, Rational::one())
                .chain(d.zip(gens).map(|(j, g)| (j, -Rational::one(), g.as_slice())));
            part.push(lp.add_vector_eq(terms, e));
        }
        rows.push(part);
    }
    let problem = lp.build();
    let outcome = lp::solve(&problem)?;
    let LpOutcome::Optimal { value: sv, primal, dual } = &outcome else {
        return Err(Error::MalformedProblem(format!("incompatibility program not optimal: {outcome:?}")));
    };
    let r = sv - Rational::one();
    let joint = vars.effects(primal, &space);
    let factors: Vec<Vec<String>> = family.iter().map(|m| m.labels().to_vec()).collect();
    let noise = if r.is_positive() {
        let inv = r.recip();
        let margins = margins_of(&index, &joint, space.dim());
        Some(
            family
                .iter()
                .zip(margins)
                .map(|(m, mx)| {
                    let effects = mx.iter().zip(m.effects()).map(|(g, e)| scale(&inv, &sub(g, e))).collect();
                    Evm::from_parts_unchecked(space.clone(), m.labels().to_vec(), effects)
                })
                .collect(),
        )
    } else {
        None
    };
    // ψ_{x,y} lies in the dual cone, has compatible value <= 1 and
    // Σ ⟨ψ_{x,y}, M_x(y)⟩ = 1 + R, so its total weight is >= 1 + R > 0.
    let psi: Vec<Vec<Functional>> = rows
        .iter()
        .map(|part| part.iter().map(|r| Functional::new(dual.eq[r.clone()].to_vec())).collect())
        .collect();
    let n: Rational = psi.iter().flatten().map(|f| f.pair(space.order_unit())).sum();
    let parts = psi
        .into_iter()
        .zip(&factors)
        .map(|(part, ls)| WStarFamily::new(ls.clone(), part.iter().map(|f| f.scaled(&n.recip())).collect()))
        .collect::<Result<Vec<_>>>()?;
    let dual_ensemble = PartitionedEnsemble::new(space.clone(), parts)?;
    let dual_problem = incompatibility_dual(family, limit)?;
    let dual_outcome = lp::solve(&dual_problem)?;
    Ok(IncompReport {
        value: r,
        family: family.to_vec(),
        joint,
        joint_labels: joint_labels(&index, &factors),
        noise,
        dual_ensemble,
        primal_problem: problem,
        primal_outcome: outcome,
        dual_problem,
        dual_outcome,
        limit,
    })
}

/// The dual program stated directly: maximize `Σ_{x,y} ⟨ψ_{x,y}, M_x(y)⟩`
/// over dual cone `ψ_{x,y}` and free `χ` with `⟨χ, u⟩ <= 1` and
/// `χ - Σ_x ψ_{x,z_x}` in the dual cone for every joint outcome `z`.
pub fn incompatibility_dual(family: &[Evm], limit: usize) -> Result<LpProblem> {
    check_family(family)?;
    let space = family[0].space();
    let dim = space.dim();
    let index = product_index(family, limit)?;
    let mut lp = LpBuilder::new(Sense::Maximize);
    let free_block = |lp: &mut LpBuilder, cost: &[Rational]| {
        let start = lp.num_vars();
        for c in cost {
            lp.add_var(Bound::Free, c.clone());
        }
        start..start + dim
    };
    let psi: Vec<Vec<Range<usize>>> = family
        .iter()
        .map(|m| m.effects().iter().map(|e| free_block(&mut lp, e)).collect())
        .collect();
    let chi = free_block(&mut lp, &zeros(dim));
    let pair = |vars: &Range<usize>, v: &[Rational], sign: &Rational| -> Vec<(usize, Rational)> {
        vars.clone().zip(v).filter(|(_, a)| !a.is_zero()).map(|(j, a)| (j, sign * a)).collect()
    };
    let one = Rational::one();
    let minus = -Rational::one();
    for block in psi.iter().flatten() {
        for g in space.generators() {
            lp.add_le(pair(block, g, &minus), Rational::zero());
        }
    }
    lp.add_le(pair(&chi, space.order_unit(), &one), Rational::one());
    for z in 0..index.count {
        let t = index.tuple(z);
        for g in space.generators() {
            let mut terms = pair(&chi, g, &minus);
            for (x, &y) in t.iter().enumerate() {
                terms.extend(pair(&psi[x][y], g, &one));
            }
            lp.add_le(terms, Rational::zero());
        }
    }
    Ok(lp.build())
}

/// Worst size-`k` subfamily and its report.
#[derive(Debug, Clone, PartialEq)]
pub struct SubfamilyScan {
    pub subset: Vec<usize>,
    pub report: IncompReport,
}

/// Maximizes [`r_inc`] over all size-`k` subfamilies; ties keep the
/// lexicographically first subset.
pub fn finite_subfamily_scan(family: &[Evm], k: usize, limit: usize) -> Result<SubfamilyScan> {
    check_family(family)?;
    if k == 0 || k > family.len() {
        return Err(Error::MalformedProblem(format!("subfamily size {k} for a family of {}", family.len())));
    }
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best: Option<SubfamilyScan> = None;
    loop {
        let members: Vec<Evm> = subset.iter().map(|&i| family[i].clone()).collect();
        let report = r_inc_bounded(&members, limit)?;
        if best.as_ref().is_none_or(|b| report.value > b.report.value) {
            best = Some(SubfamilyScan { subset: subset.clone(), report });
        }
        // next combination
        let n = family.len();
        let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
            break;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    Ok(best.expect("at least one subset"))
}
