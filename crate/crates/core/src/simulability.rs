//! Simulability of a measurement by convex mixing and post-processing of a
//! finite list of simulators, the maximal success probability of such a
//! simulation, and the robustness of unsimulability.
//!
//! All three are linear programs over linearized kernels `q_i(x|y) >= 0`
//! with `Σ_x q_i(x|y) = λ_i` for every simulator outcome `y`: the simulated
//! effect is `Σ_{i,y} q_i(x|y) N_i(y)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::evm::{check_same_space, mix_direct_sum, unit_evm, Evm};
use crate::gain::{
    decompose_family, gain_partitioned, gain_set, gain_value, Ensemble, Functional,
    PartitionedEnsemble, WStarFamily,
};
use crate::lp::{self, verify_certificate, Bound, LpBuilder, LpOutcome, LpProblem, Sense};
use crate::rational::{axpy, scale, sub, zeros, Rational, Vector};

/// Linearized mixture of post-processings: `λ_i` and `q_i(x|y)` with
/// `Σ_x q_i(x|y) = λ_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimWitness {
    pub weights: Vector,
    /// `kernels[i][x][y] = q_i(x|y)`
    pub kernels: Vec<Vec<Vector>>,
}

impl SimWitness {
    /// Effects `Σ_{i,y} q_i(x|y) N_i(y)` for each target outcome `x`.
    pub fn simulated_effects(&self, sims: &[Evm]) -> Vec<Vector> {
        let dim = sims.first().map_or(0, |n| n.space().dim());
        let nx = self.kernels.first().map_or(0, Vec::len);
        (0..nx)
            .map(|x| {
                let mut v = zeros(dim);
                for (q, n) in self.kernels.iter().zip(sims) {
                    for (w, e) in q[x].iter().zip(n.effects()) {
                        axpy(&mut v, w, e);
                    }
                }
                v
            })
            .collect()
    }

    /// Checks shape, signs, column sums and that the simulation reproduces
    /// `m` exactly.
    pub fn verify(&self, m: &Evm, sims: &[Evm]) -> bool {
        if self.weights.len() != sims.len() || self.kernels.len() != sims.len() {
            return false;
        }
        if self.weights.iter().any(Signed::is_negative)
            || self.weights.iter().fold(Rational::zero(), |a, w| a + w) != Rational::one()
        {
            return false;
        }
        for ((q, n), lambda) in self.kernels.iter().zip(sims).zip(&self.weights) {
            if q.len() != m.len() || q.iter().any(|row| row.len() != n.len()) {
                return false;
            }
            if q.iter().flatten().any(Signed::is_negative) {
                return false;
            }
            for y in 0..n.len() {
                if q.iter().fold(Rational::zero(), |a, row| a + &row[y]) != *lambda {
                    return false;
                }
            }
        }
        sims.iter().all(|n| n.same_space(m)) && self.simulated_effects(sims) == m.effects()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimVerdict {
    Simulable(SimWitness),
    /// `gain(separator, M) = gain_target > gain_simulators = gain_set(separator, L)`.
    NotSimulable {
        separator: Ensemble,
        gain_target: Rational,
        gain_simulators: Rational,
    },
}

impl SimVerdict {
    pub fn is_simulable(&self) -> bool {
        matches!(self, SimVerdict::Simulable(_))
    }

    pub fn verify(&self, m: &Evm, sims: &[Evm]) -> bool {
        match self {
            SimVerdict::Simulable(w) => w.verify(m, sims),
            SimVerdict::NotSimulable { separator, gain_target, gain_simulators } => {
                gain_target > gain_simulators
                    && gain_value(separator.family(), m).is_ok_and(|g| g == *gain_target)
                    && gain_set(separator.family(), sims).is_ok_and(|g| g == *gain_simulators)
            }
        }
    }
}

fn check_inputs(m: &Evm, sims: &[Evm]) -> Result<()> {
    if sims.is_empty() {
        return Err(Error::EmptyList);
    }
    sims.iter().try_for_each(|n| check_same_space(m, n))
}

/// Kernel and weight variables of a simulation LP.
struct KernelVars {
    nt: usize,
    /// first variable index of `q_i`
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    lambda: Range<usize>,
}

impl KernelVars {
    /// Adds `q_i(x|y)` for `nt` target outcomes, `λ_i`, and the column-sum
    /// rows `Σ_x q_i(x|y) - λ_i = 0`. `λ_i` costs `lambda_cost`.
    fn add(lp: &mut LpBuilder, nt: usize, sims: &[Evm], lambda_cost: &Rational) -> Self {
        let mut offsets = Vec::with_capacity(sims.len());
        let sizes: Vec<usize> = sims.iter().map(Evm::len).collect();
        for &ny in &sizes {
            offsets.push(lp.add_vars(nt * ny, Bound::NonNegative).start);
        }
        let start = lp.num_vars();
        for _ in sims {
            lp.add_var(Bound::NonNegative, lambda_cost.clone());
        }
        let vars = KernelVars { nt, offsets, sizes, lambda: start..lp.num_vars() };
        for (i, &ny) in vars.sizes.iter().enumerate() {
            for y in 0..ny {
                let mut terms: Vec<(usize, Rational)> =
                    (0..nt).map(|x| (vars.q(i, x, y), Rational::one())).collect();
                terms.push((vars.lambda.start + i, -Rational::one()));
                lp.add_eq(terms, Rational::zero());
            }
        }
        vars
    }

    fn q(&self, i: usize, x: usize, y: usize) -> usize {
        self.offsets[i] + x * self.sizes[i] + y
    }

    /// Terms `(q_i(x|y), 1, N_i(y))` of the simulated effect for outcome `x`.
    fn effect_terms<'a>(&'a self, x: usize, sims: &'a [Evm]) -> impl Iterator<Item = (usize, Rational, &'a [Rational])> + 'a {
        sims.iter().enumerate().flat_map(move |(i, n)| {
            n.effects().iter().enumerate().map(move |(y, e)| (self.q(i, x, y), Rational::one(), e.as_slice()))
        })
    }

    fn witness(&self, primal: &[Rational], divide_by: &Rational) -> SimWitness {
        let inv = divide_by.recip();
        let weights = primal[self.lambda.clone()].iter().map(|l| l * &inv).collect();
        let kernels = self
            .sizes
            .iter()
            .enumerate()
            .map(|(i, &ny)| {
                (0..self.nt)
                    .map(|x| (0..ny).map(|y| &primal[self.q(i, x, y)] * &inv).collect())
                    .collect()
            })
            .collect();
        SimWitness { weights, kernels }
    }
}

fn negated_rows(farkas_eq: &[Rational], rows: &Range<usize>) -> Functional {
    Functional::new(scale(&-Rational::one(), &farkas_eq[rows.clone()]))
}

/// Decides whether `m` is simulable by `sims`.
pub fn is_simulable(m: &Evm, sims: &[Evm]) -> Result<SimVerdict> {
    check_inputs(m, sims)?;
    let mut lp = LpBuilder::new(Sense::Minimize);
    let vars = KernelVars::add(&mut lp, m.len(), sims, &Rational::zero());
    let rows: Vec<Range<usize>> = m
        .effects()
        .iter()
        .enumerate()
        .map(|(x, e)| lp.add_vector_eq(vars.effect_terms(x, sims), e))
        .collect();
    lp.add_eq(vars.lambda.clone().map(|j| (j, Rational::one())).collect(), Rational::one());
    match lp::solve(&lp.build())? {
        LpOutcome::Optimal { primal, .. } => Ok(SimVerdict::Simulable(vars.witness(&primal, &Rational::one()))),
        LpOutcome::Infeasible { farkas } => {
            // ψ_x = -φ_x: gain(ψ; N_i) <= Σ_y μ_{i,y} <= τ < Σ_x ⟨ψ_x, M(x)⟩.
            let psi = rows.iter().map(|r| negated_rows(&farkas.eq, r)).collect();
            let family = WStarFamily::new(m.labels().to_vec(), psi)?;
            let separator = decompose_family(m.space(), &family)?.ensemble;
            let gain_target = gain_value(separator.family(), m)?;
            let gain_simulators = gain_set(separator.family(), sims)?;
            Ok(SimVerdict::NotSimulable { separator, gain_target, gain_simulators })
        }
        LpOutcome::Unbounded { .. } => unreachable!("zero objective"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobustnessKind {
    /// Maximal success probability of simulation, in `[0, 1]`.
    SuccessProbability,
    /// Robustness of unsimulability, `>= 0`.
    Unsimulability,
}

/// Optimum of a simulability LP with primal and dual witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub kind: RobustnessKind,
    pub value: Rational,
    pub target: Evm,
    pub simulators: Vec<Evm>,
    /// The simulable measurement realized at the optimum: `K/(1+R)` for
    /// unsimulability, `q M ⊕ (1-q) [u]` for success probability.
    pub simulated: Evm,
    pub witness: SimWitness,
    /// `N` with `(M + R N)/(1 + R) = simulated`; present when `R > 0`.
    pub noise: Option<Evm>,
    /// Attained optimum of the finite dual LP as an ensemble; absent only
    /// when the success probability is one.
    pub dual_ensemble: Option<Ensemble>,
    pub primal_problem: LpProblem,
    pub primal_outcome: LpOutcome,
    /// Separately built dual program (unsimulability only).
    pub dual_problem: Option<LpProblem>,
    pub dual_outcome: Option<LpOutcome>,
}

impl RobustnessReport {
    /// Primal LP optimum: `1 + R` or `q`.
    pub fn primal_value(&self) -> &Rational {
        self.primal_outcome.value().expect("optimal")
    }

    pub fn dual_value(&self) -> Option<&Rational> {
        self.dual_outcome.as_ref().and_then(LpOutcome::value)
    }

    /// For unsimulability: `gain(E*; M)` and `gain_set(E*; L)`, related by
    /// `gain(E*; M) = (1 + R) gain_set(E*; L)`. For success probability:
    /// `(gain_set(E; L) - gain(E; [u])) / (gain(E; M) - gain(E; [u])) = q`,
    /// returned as `(numerator, denominator)`.
    pub fn dual_gains(&self) -> Option<(Rational, Rational)> {
        let e = self.dual_ensemble.as_ref()?.family();
        let gm = gain_value(e, &self.target).ok()?;
        let gl = gain_set(e, &self.simulators).ok()?;
        match self.kind {
            RobustnessKind::Unsimulability => Some((gm, gl)),
            RobustnessKind::SuccessProbability => {
                let g0 = gain_value(e, &unit_evm(self.target.space().clone(), "u")).ok()?;
                Some((gl - &g0, gm - g0))
            }
        }
    }

    /// Re-checks every certificate by direct arithmetic.
    pub fn verify(&self) -> bool {
        let one = Rational::one();
        if !self.primal_outcome.is_optimal() || !verify_certificate(&self.primal_problem, &self.primal_outcome) {
            return false;
        }
        if !self.witness.verify(&self.simulated, &self.simulators) {
            return false;
        }
        match self.kind {
            RobustnessKind::Unsimulability => {
                let r = &self.value;
                let (Some(dp), Some(dout)) = (&self.dual_problem, &self.dual_outcome) else {
                    return false;
                };
                if r.is_negative()
                    || *self.primal_value() != r + &one
                    || !verify_certificate(dp, dout)
                    || dout.value() != Some(self.primal_value())
                {
                    return false;
                }
                // (1 + R) S = M + R N
                let noise_ok = match &self.noise {
                    Some(n) => {
                        r.is_positive()
                            && n.same_space(&self.target)
                            && self.simulated.iter().zip(self.target.iter()).zip(n.iter()).all(
                                |(((ls, s), (lm, m)), (ln, nv))| {
                                    ls == lm && lm == ln && {
                                        let mut rhs = m.clone();
                                        axpy(&mut rhs, r, nv);
                                        scale(&(r + &one), s) == rhs
                                    }
                                },
                            )
                    }
                    None => r.is_zero() && self.simulated == self.target,
                };
                noise_ok && self.dual_gains().is_some_and(|(gm, gl)| gm == (r + &one) * gl)
            }
            RobustnessKind::SuccessProbability => {
                let q = &self.value;
                if q.is_negative() || *q > one || self.primal_value() != q {
                    return false;
                }
                let expected = mix_direct_sum(q, &self.target, &unit_evm(self.target.space().clone(), "u"));
                if expected.as_ref() != Ok(&self.simulated) {
                    return false;
                }
                match self.dual_gains() {
                    Some((num, den)) => den.is_positive() && num == q * den,
                    None => q.is_one() && self.dual_ensemble.is_none(),
                }
            }
        }
    }
}

/// Maximal `q` such that `q M ⊕ (1-q) [u]` is simulable by `sims`.
pub fn q_succ(m: &Evm, sims: &[Evm]) -> Result<RobustnessReport> {
    check_inputs(m, sims)?;
    let space = m.space().clone();
    let nx = m.len();
    let mut lp = LpBuilder::new(Sense::Maximize);
    // Target outcomes 0..nx are M's, nx is the failure outcome. Its effect
    // row is implied by the others and the column sums, so it is omitted.
    let vars = KernelVars::add(&mut lp, nx + 1, sims, &Rational::zero());
    let q = lp.add_var(Bound::NonNegative, Rational::one());
    let zero = zeros(space.dim());
    let rows: Vec<Range<usize>> = m
        .effects()
        .iter()
        .enumerate()
        .map(|(x, e)| {
            let terms = vars.effect_terms(x, sims).chain(core::iter::once((q, -Rational::one(), e.as_slice())));
            lp.add_vector_eq(terms, &zero)
        })
        .collect();
    lp.add_eq(vars.lambda.clone().map(|j| (j, Rational::one())).collect(), Rational::one());
    let problem = lp.build();
    let outcome = lp::solve(&problem)?;
    let LpOutcome::Optimal { value, primal, dual } = &outcome else {
        return Err(Error::MalformedProblem(format!("simulation program not optimal: {outcome:?}")));
    };
    let value = value.clone();
    let witness = vars.witness(primal, &Rational::one());
    let simulated = mix_direct_sum(&value, m, &unit_evm(space.clone(), "u"))?;
    let dual_ensemble = if value.is_one() {
        None
    } else {
        // ψ_x = -φ_x on M's outcomes and ψ = 0 on failure.
        let mut labels: Vec<String> = m.labels().iter().map(|x| format!("0:{x}")).collect();
        labels.push(String::from("1:u"));
        let mut psi: Vec<Functional> = rows.iter().map(|r| negated_rows(&dual.eq, r)).collect();
        psi.push(Functional::zero(space.dim()));
        let family = WStarFamily::new(labels, psi)?;
        Some(decompose_family(&space, &family)?.ensemble)
    };
    Ok(RobustnessReport {
        kind: RobustnessKind::SuccessProbability,
        value,
        target: m.clone(),
        simulators: sims.to_vec(),
        simulated,
        witness,
        noise: None,
        dual_ensemble,
        primal_problem: problem,
        primal_outcome: outcome,
        dual_problem: None,
        dual_outcome: None,
    })
}

/// Robustness of unsimulability: least `R >= 0` such that
/// `(M + R N)/(1 + R)` is simulable by `sims` for some measurement `N`.
///
/// Primal: minimize `Σ λ_i` subject to `K(x) - M(x) ∈ E_+`, where `K` is the
/// simulated effect family; the optimum is `1 + R`.
pub fn r_uns(m: &Evm, sims: &[Evm]) -> Result<RobustnessReport> {
    check_inputs(m, sims)?;
    let space = m.space().clone();
    let gens = space.generators();
    let mut lp = LpBuilder::new(Sense::Minimize);
    let vars = KernelVars::add(&mut lp, m.len(), sims, &Rational::one());
    let rows: Vec<Range<usize>> = m
        .effects()
        .iter()
        .enumerate()
        .map(|(x, e)| {
            let d = lp.add_vars(gens.len(), Bound::NonNegative);
            let terms = vars
                .effect_terms(x, sims)
                .chain(d.zip(gens).map(|(j, g)| (j, -Rational::one(), g.as_slice())));
            lp.add_vector_eq(terms, e)
        })
        .collect();
    let problem = lp.build();
    let outcome = lp::solve(&problem)?;
    let LpOutcome::Optimal { value: s, primal, dual } = &outcome else {
        return Err(Error::MalformedProblem(format!("unsimulability program not optimal: {outcome:?}")));
    };
    let r = s - Rational::one();
    let witness = vars.witness(primal, s);
    let simulated = Evm::from_parts_unchecked(space.clone(), m.labels().to_vec(), witness.simulated_effects(sims));
    let noise = if r.is_positive() {
        let inv = r.recip();
        let effects = simulated
            .effects()
            .iter()
            .zip(m.effects())
            .map(|(k, e)| scale(&inv, &sub(&scale(s, k), e)))
            .collect();
        Some(Evm::from_parts_unchecked(space.clone(), m.labels().to_vec(), effects))
    } else {
        None
    };
    // ψ_x = φ_x lies in the dual cone and gain(ψ; N_i) <= 1 for every
    // simulator while Σ_x ⟨ψ_x, M(x)⟩ = 1 + R, so ⟨Σ_x ψ_x, u⟩ >= 1 + R > 0.
    let psi: Vec<Functional> = rows.iter().map(|r| Functional::new(dual.eq[r.clone()].to_vec())).collect();
    let n: Rational = psi.iter().map(|f| f.pair(space.order_unit())).sum();
    let family = WStarFamily::new(m.labels().to_vec(), psi.iter().map(|f| f.scaled(&n.recip())).collect())?;
    let dual_ensemble = Some(Ensemble::new(space.clone(), family)?);
    let dual_problem = unsimulability_dual(m, sims);
    let dual_outcome = lp::solve(&dual_problem)?;
    Ok(RobustnessReport {
        kind: RobustnessKind::Unsimulability,
        value: r,
        target: m.clone(),
        simulators: sims.to_vec(),
        simulated,
        witness,
        noise,
        dual_ensemble,
        primal_problem: problem,
        primal_outcome: outcome,
        dual_problem: Some(dual_problem),
        dual_outcome: Some(dual_outcome),
    })
}

/// The dual program stated directly: maximize `Σ_x ⟨ψ_x, M(x)⟩` over dual
/// cone functionals `ψ_x` and free `ν_{i,y}` with `⟨ψ_x, N_i(y)⟩ <= ν_{i,y}`
/// and `Σ_y ν_{i,y} <= 1`.
pub fn unsimulability_dual(m: &Evm, sims: &[Evm]) -> LpProblem {
    let space = m.space();
    let dim = space.dim();
    let mut lp = LpBuilder::new(Sense::Maximize);
    let psi: Vec<Range<usize>> = m
        .effects()
        .iter()
        .map(|e| {
            let start = lp.num_vars();
            for c in e {
                lp.add_var(Bound::Free, c.clone());
            }
            start..start + dim
        })
        .collect();
    let pair_terms = |vars: &Range<usize>, v: &[Rational], sign: Rational| -> Vec<(usize, Rational)> {
        vars.clone().zip(v).filter(|(_, a)| !a.is_zero()).map(|(j, a)| (j, &sign * a)).collect()
    };
    for p in &psi {
        for g in space.generators() {
            lp.add_le(pair_terms(p, g, -Rational::one()), Rational::zero());
        }
    }
    for n in sims {
        let nu = lp.add_vars(n.len(), Bound::Free);
        for (y, e) in n.effects().iter().enumerate() {
            for p in &psi {
                let mut terms = pair_terms(p, e, Rational::one());
                terms.push((nu.start + y, -Rational::one()));
                lp.add_le(terms, Rational::zero());
            }
        }
        lp.add_le(nu.map(|j| (j, Rational::one())).collect(), Rational::one());
    }
    lp.build()
}

/// `gain_partitioned(Ē, [M]) <= (1 + R) gain_partitioned(Ē, L)`.
pub fn r_uns_ratio_check(report: &RobustnessReport, pe: &PartitionedEnsemble) -> bool {
    let lhs = gain_partitioned(pe, core::slice::from_ref(&report.target));
    let rhs = gain_partitioned(pe, &report.simulators);
    match (lhs, rhs) {
        (Ok(l), Ok(r)) => l <= (&report.value + Rational::one()) * r,
        _ => false,
    }
}
