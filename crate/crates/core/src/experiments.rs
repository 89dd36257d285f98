//! Finite classical statistical experiments `θ ↦ P(θ, ·)` and their
//! identification with measurements on `classical(|Θ|)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::evm::Evm;
use crate::gain::Functional;
use crate::order::{test_post_processing, OrderVerdict};
use crate::rational::{Rational, Vector};
use crate::space::{standard_space, GptSpace, SpaceKind};

/// Row-stochastic kernel: `kernel[θ][s] = P(θ, s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatExperiment {
    params: Vec<String>,
    samples: Vec<String>,
    kernel: Vec<Vector>,
}

fn distinct(labels: &[String], what: &str) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::BadExperiment(format!("duplicate {what} {l:?}")));
        }
    }
    Ok(())
}

impl StatExperiment {
    pub fn new(params: Vec<String>, samples: Vec<String>, kernel: Vec<Vector>) -> Result<Self> {
        if params.is_empty() || samples.is_empty() {
            return Err(Error::BadExperiment("empty parameter or sample set".into()));
        }
        distinct(&params, "parameter")?;
        distinct(&samples, "sample")?;
        if kernel.len() != params.len() || kernel.iter().any(|r| r.len() != samples.len()) {
            return Err(Error::BadExperiment("kernel shape does not match labels".into()));
        }
        for (theta, row) in params.iter().zip(&kernel) {
            if row.iter().any(Signed::is_negative) {
                return Err(Error::BadExperiment(format!("negative probability for {theta:?}")));
            }
            let total: Rational = row.iter().sum();
            if !total.is_one() {
                return Err(Error::BadExperiment(format!("row {theta:?} sums to {total}")));
            }
        }
        Ok(StatExperiment { params, samples, kernel })
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn samples(&self) -> &[String] {
        &self.samples
    }

    pub fn kernel(&self) -> &[Vector] {
        &self.kernel
    }
}

/// The effect of sample `s` is the column `(P(θ, s))_θ`.
pub fn experiment_to_evm(e: &StatExperiment) -> Result<Evm> {
    let space = Arc::new(standard_space(SpaceKind::Classical(e.params.len()))?);
    experiment_to_evm_on(e, space)
}

/// As [`experiment_to_evm`] on a caller-supplied `classical(|Θ|)`.
pub fn experiment_to_evm_on(e: &StatExperiment, space: Arc<GptSpace>) -> Result<Evm> {
    if space.dim() != e.params.len() || !space.is_classical() {
        return Err(Error::ParameterMismatch);
    }
    let effects = (0..e.samples.len())
        .map(|s| (e.samples[s].clone(), e.kernel.iter().map(|row| row[s].clone()).collect()))
        .collect();
    Evm::new(space, effects)
}

/// `P(θ, x) = ⟨ψ_θ, M(x)⟩` for each labeled state `ψ_θ`.
pub fn evm_to_experiment(m: &Evm, states: &[(String, Functional)]) -> Result<StatExperiment> {
    for (label, psi) in states {
        if !m.space().is_state(psi) {
            return Err(Error::NotAState(label.clone()));
        }
    }
    let params = states.iter().map(|(l, _)| l.clone()).collect();
    let kernel = states
        .iter()
        .map(|(_, psi)| m.effects().iter().map(|e| psi.pair(e)).collect())
        .collect();
    StatExperiment::new(params, m.labels().to_vec(), kernel)
}

/// Point states `δ_θ` of `classical(n)`, labeled by `params`.
pub fn point_states(params: &[String]) -> Vec<(String, Functional)> {
    let n = params.len();
    params
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let coords = (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect();
            (l.clone(), Functional::new(coords))
        })
        .collect()
}

/// Is `e1` a garbling of `e2`? `Below` carries the randomization
/// `p(s1 | s2)`, `NotBelow` a prior-weighted decision problem on `Θ` where
/// `e1` does strictly better.
pub fn blackwell_compare(e1: &StatExperiment, e2: &StatExperiment) -> Result<OrderVerdict> {
    if e1.params != e2.params {
        return Err(Error::ParameterMismatch);
    }
    let space = Arc::new(standard_space(SpaceKind::Classical(e1.params.len()))?);
    let a = experiment_to_evm_on(e1, space.clone())?;
    let b = experiment_to_evm_on(e2, space)?;
    test_post_processing(&a, &b)
}
