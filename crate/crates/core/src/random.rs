//! Seeded random instances with small exact rationals, for property tests,
//! benchmarks and demos. Every generator takes the RNG explicitly, so a
//! fixed seed gives a fixed instance.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::evm::{Evm, OutcomePartition, StochasticMatrix};
use crate::experiments::StatExperiment;
use crate::gain::{Ensemble, Functional, PartitionedEnsemble, WStarFamily};
use crate::lp::{self, Bound, LpBuilder, LpOutcome, Sense};
use crate::rational::{axpy, int, rat, scale, sub, zeros, Rational, Vector};
use crate::space::GptSpace;

/// Labels `"0"`, `"1"`, ...
pub fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{i}")).collect()
}

/// Probability vector with small integer weights, at least one positive.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    let mut w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
    if w.iter().all(|&v| v == 0) {
        w[rng.gen_range(0..n)] = 1;
    }
    let total: i64 = w.iter().sum();
    w.into_iter().map(|v| rat(v, total)).collect()
}

/// Nonzero nonnegative integer combination of the cone generators.
fn random_cone_element<R: Rng + ?Sized>(rng: &mut R, space: &GptSpace) -> Vector {
    let gens = space.generators();
    let mut c: Vec<i64> = (0..gens.len()).map(|_| rng.gen_range(0..=3)).collect();
    if c.iter().all(|&v| v == 0) {
        c[rng.gen_range(0..gens.len())] = 1;
    }
    let mut v = zeros(space.dim());
    for (ci, g) in c.into_iter().zip(gens) {
        axpy(&mut v, &int(ci), g);
    }
    v
}

/// Largest `t` with `u - t s ∈ E_+`.
fn max_fit(space: &GptSpace, s: &[Rational]) -> Rational {
    let mut b = LpBuilder::new(Sense::Maximize);
    let c = b.add_vars(space.generators().len(), Bound::NonNegative);
    let t = b.add_var(Bound::NonNegative, Rational::one());
    let terms = c
        .zip(space.generators())
        .map(|(j, g)| (j, Rational::one(), g.as_slice()))
        .chain(core::iter::once((t, Rational::one(), s)));
    b.add_vector_eq(terms, space.order_unit());
    match lp::solve(&b.build()) {
        Ok(LpOutcome::Optimal { value, .. }) => value,
        other => unreachable!("u is interior and s is a nonzero cone element: {other:?}"),
    }
}

/// Random EVM with `n` outcomes labeled `"0"..`: `M(x) = t e_x + w_x (u - t Σ e)`
/// with random cone elements `e_x`, a random fraction `t` of the largest
/// feasible scale and random weights `w`.
pub fn random_evm<R: Rng + ?Sized>(rng: &mut R, space: &Arc<GptSpace>, n: usize) -> Evm {
    let es: Vec<Vector> = (0..n).map(|_| random_cone_element(rng, space)).collect();
    let mut total = zeros(space.dim());
    for e in &es {
        axpy(&mut total, &Rational::one(), e);
    }
    let t = max_fit(space, &total) * rat(rng.gen_range(1..=4), 4);
    let rest = sub(space.order_unit(), &scale(&t, &total));
    let w = random_distribution(rng, n);
    let effects = es
        .iter()
        .zip(&w)
        .map(|(e, wx)| {
            let mut v = scale(&t, e);
            axpy(&mut v, wx, &rest);
            v
        })
        .collect();
    Evm::from_parts_unchecked(space.clone(), index_labels(n), effects)
}

/// Random functional in the dual cone, nonzero.
pub fn random_dual_functional<R: Rng + ?Sized>(rng: &mut R, space: &GptSpace) -> Functional {
    let sigma = space.interior_state();
    let r = Functional::new((0..space.dim()).map(|_| int(rng.gen_range(-3..=3))).collect());
    let mut beta = Rational::zero();
    for g in space.generators() {
        let v = r.pair(g);
        if v.is_negative() {
            let need = -v / sigma.pair(g);
            if need > beta {
                beta = need;
            }
        }
    }
    beta += rat(rng.gen_range(0..=2), 2);
    let f = r.plus(&sigma.scaled(&beta));
    if f.pair(space.order_unit()).is_zero() {
        sigma.clone()
    } else {
        f
    }
}

fn normalize(space: &GptSpace, fs: Vec<Functional>) -> Vec<Functional> {
    let total: Rational = fs.iter().map(|f| f.pair(space.order_unit())).sum();
    let inv = total.recip();
    fs.into_iter().map(|f| f.scaled(&inv)).collect()
}

/// Random ensemble of `n` labeled dual-cone functionals.
pub fn random_ensemble<R: Rng + ?Sized>(rng: &mut R, space: &Arc<GptSpace>, n: usize) -> Ensemble {
    let fs = (0..n).map(|_| random_dual_functional(rng, space)).collect();
    let family = WStarFamily::new(index_labels(n), normalize(space, fs)).expect("distinct labels");
    Ensemble::new(space.clone(), family).expect("positive and normalized")
}

/// Random ensemble whose labels are those of `labels`.
pub fn random_ensemble_labeled<R: Rng + ?Sized>(rng: &mut R, space: &Arc<GptSpace>, labels: &[String]) -> Ensemble {
    let fs = labels.iter().map(|_| random_dual_functional(rng, space)).collect();
    let family = WStarFamily::new(labels.to_vec(), normalize(space, fs)).expect("distinct labels");
    Ensemble::new(space.clone(), family).expect("positive and normalized")
}

/// Random partitioned ensemble with the given part sizes.
pub fn random_partitioned_ensemble<R: Rng + ?Sized>(rng: &mut R, space: &Arc<GptSpace>, sizes: &[usize]) -> PartitionedEnsemble {
    let all: Vec<Functional> = sizes.iter().flat_map(|&n| (0..n).collect::<Vec<_>>()).map(|_| random_dual_functional(rng, space)).collect();
    let mut all = normalize(space, all).into_iter();
    let parts = sizes
        .iter()
        .map(|&n| WStarFamily::new(index_labels(n), all.by_ref().take(n).collect()).expect("distinct labels"))
        .collect();
    PartitionedEnsemble::new(space.clone(), parts).expect("positive and normalized")
}

/// Random column-stochastic matrix.
pub fn random_stochastic_matrix<R: Rng + ?Sized>(rng: &mut R, rows: &[String], cols: &[String]) -> StochasticMatrix {
    let columns: Vec<Vector> = cols.iter().map(|_| random_distribution(rng, rows.len())).collect();
    let p = (0..rows.len()).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
    StochasticMatrix::new(rows.to_vec(), cols.to_vec(), p).expect("columns are distributions")
}

/// Random partition of `labels` into nonempty blocks.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, labels: &[String]) -> OutcomePartition {
    let k = rng.gen_range(1..=labels.len().max(1));
    let mut blocks: Vec<Vec<String>> = (0..k).map(|_| Vec::new()).collect();
    for (i, l) in labels.iter().enumerate() {
        // the first k labels seed the blocks so none is empty
        let b = if i < k { i } else { rng.gen_range(0..k) };
        blocks[b].push(l.clone());
    }
    OutcomePartition::new(blocks)
}

/// Random experiment with row distributions over `samples`.
pub fn random_experiment<R: Rng + ?Sized>(rng: &mut R, params: &[String], samples: &[String]) -> StatExperiment {
    let kernel = params.iter().map(|_| random_distribution(rng, samples.len())).collect();
    StatExperiment::new(params.to_vec(), samples.to_vec(), kernel).expect("rows are distributions")
}
