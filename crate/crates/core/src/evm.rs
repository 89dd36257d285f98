//! Finite-outcome effect-valued measures (EVMs).
//!
//! An EVM assigns to each outcome label an effect in `E_+`; the effects sum
//! to the order unit. Zero effects are allowed so that mixtures with weight
//! zero or one stay total.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{
    add_assign, axpy, is_zero_vec, proportionality_factor, rank, scale, sub, zeros, Rational,
    Vector,
};
use crate::space::{ConeCertificate, GptSpace};

/// A validated finite-outcome EVM on a [`GptSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evm {
    space: Arc<GptSpace>,
    labels: Vec<String>,
    effects: Vec<Vector>,
}

/// Row-labeled, column-labeled `p(x|y)` with columns summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    /// `p[row][col]`
    p: Vec<Vector>,
}

/// Disjoint nonempty blocks covering an outcome set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomePartition {
    blocks: Vec<Vec<String>>,
}

pub fn validate_evm(space: Arc<GptSpace>, effects: Vec<(String, Vector)>) -> Result<Evm> {
    Evm::new(space, effects)
}

fn check_distinct(labels: &[String]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl Evm {
    pub fn new(space: Arc<GptSpace>, effects: Vec<(String, Vector)>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::NoOutcomes);
        }
        let (labels, effects): (Vec<String>, Vec<Vector>) = effects.into_iter().unzip();
        check_distinct(&labels)?;
        let mut sum = zeros(space.dim());
        for (label, e) in labels.iter().zip(&effects) {
            space.check_dim(e)?;
            if let ConeCertificate::Separated { functional } = space.cone_member(e)? {
                return Err(Error::EffectNotPositive { label: label.clone(), separator: functional });
            }
            add_assign(&mut sum, e);
        }
        let residual = sub(&sum, space.order_unit());
        if !is_zero_vec(&residual) {
            return Err(Error::NotNormalized { residual });
        }
        Ok(Evm { space, labels, effects })
    }

    /// Builds without re-running cone checks. Callers guarantee validity.
    pub(crate) fn from_parts_unchecked(space: Arc<GptSpace>, labels: Vec<String>, effects: Vec<Vector>) -> Self {
        debug_assert_eq!(labels.len(), effects.len());
        Evm { space, labels, effects }
    }

    pub fn space(&self) -> &Arc<GptSpace> {
        &self.space
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn effects(&self) -> &[Vector] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vector)> {
        self.labels.iter().zip(&self.effects)
    }

    pub fn effect(&self, label: &str) -> Option<&Vector> {
        self.labels.iter().position(|l| l == label).map(|i| &self.effects[i])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn same_space(&self, other: &Evm) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space == other.space
    }

    /// Effects up to outcome order, keyed by label.
    pub fn relabeled(&self, labels: Vec<String>) -> Result<Evm> {
        if labels.len() != self.len() {
            return Err(Error::LabelMismatch("relabeling must keep the outcome count".into()));
        }
        check_distinct(&labels)?;
        Ok(Evm::from_parts_unchecked(self.space.clone(), labels, self.effects.clone()))
    }
}

pub(crate) fn check_same_space(a: &Evm, b: &Evm) -> Result<()> {
    if a.same_space(b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// `M(x) = probs(x) u`.
pub fn trivial_evm(space: Arc<GptSpace>, probs: &[(String, Rational)]) -> Result<Evm> {
    if probs.is_empty() {
        return Err(Error::BadDistribution("no outcomes".into()));
    }
    if probs.iter().any(|(_, p)| p.is_negative()) {
        return Err(Error::BadDistribution("negative probability".into()));
    }
    let total = probs.iter().fold(Rational::zero(), |a, (_, p)| a + p);
    if !total.is_one() {
        return Err(Error::BadDistribution(format!("probabilities sum to {total}")));
    }
    let labels: Vec<String> = probs.iter().map(|(l, _)| l.clone()).collect();
    check_distinct(&labels)?;
    let effects = probs.iter().map(|(_, p)| scale(p, space.order_unit())).collect();
    Ok(Evm::from_parts_unchecked(space, labels, effects))
}

/// The one-outcome measurement `{label: u}`.
pub fn unit_evm(space: Arc<GptSpace>, label: &str) -> Evm {
    let u = space.order_unit().clone();
    Evm::from_parts_unchecked(space, alloc::vec![String::from(label)], alloc::vec![u])
}

fn check_weight(lambda: &Rational) -> Result<()> {
    if lambda.is_negative() || *lambda > Rational::one() {
        Err(Error::WeightOutOfRange)
    } else {
        Ok(())
    }
}

/// Performs `a` with probability `λ` and `b` otherwise, recording which one
/// ran: outcomes are `"0:"+x` and `"1:"+y`.
pub fn mix_direct_sum(lambda: &Rational, a: &Evm, b: &Evm) -> Result<Evm> {
    check_weight(lambda)?;
    check_same_space(a, b)?;
    let rest = Rational::one() - lambda;
    let mut labels = Vec::with_capacity(a.len() + b.len());
    let mut effects = Vec::with_capacity(a.len() + b.len());
    for (x, e) in a.iter() {
        labels.push(format!("0:{x}"));
        effects.push(scale(lambda, e));
    }
    for (y, e) in b.iter() {
        labels.push(format!("1:{y}"));
        effects.push(scale(&rest, e));
    }
    Ok(Evm::from_parts_unchecked(a.space.clone(), labels, effects))
}

/// Effect-wise `λ a(x) + (1-λ) b(x)` over a shared label set. `b`'s effects
/// are matched to `a`'s labels by name.
pub fn mix_pointwise(lambda: &Rational, a: &Evm, b: &Evm) -> Result<Evm> {
    check_weight(lambda)?;
    check_same_space(a, b)?;
    if a.len() != b.len() {
        return Err(Error::LabelMismatch("outcome sets differ".into()));
    }
    let rest = Rational::one() - lambda;
    let mut effects = Vec::with_capacity(a.len());
    for (x, e) in a.iter() {
        let f = b
            .effect(x)
            .ok_or_else(|| Error::LabelMismatch(format!("{x:?} missing from second measurement")))?;
        let mut v = scale(lambda, e);
        axpy(&mut v, &rest, f);
        effects.push(v);
    }
    Ok(Evm::from_parts_unchecked(a.space.clone(), a.labels.clone(), effects))
}

impl StochasticMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<String>, p: Vec<Vector>) -> Result<Self> {
        check_distinct(&rows)?;
        check_distinct(&cols)?;
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::NotStochastic("empty label set".into()));
        }
        if p.len() != rows.len() || p.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::NotStochastic("entry table does not match labels".into()));
        }
        if p.iter().flatten().any(Signed::is_negative) {
            return Err(Error::NotStochastic("negative entry".into()));
        }
        for (j, c) in cols.iter().enumerate() {
            let s = p.iter().fold(Rational::zero(), |a, r| a + &r[j]);
            if !s.is_one() {
                return Err(Error::NotStochastic(format!("column {c:?} sums to {s}")));
            }
        }
        Ok(StochasticMatrix { rows, cols, p })
    }

    pub fn identity(labels: &[String]) -> Self {
        let n = labels.len();
        let p = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        StochasticMatrix { rows: labels.to_vec(), cols: labels.to_vec(), p }
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn entries(&self) -> &[Vector] {
        &self.p
    }

    /// `p(row | col)`
    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.p[row][col]
    }

    /// Matrix product `self ∘ other`: first apply `other`, then `self`.
    /// Requires `self.cols == other.rows`.
    pub fn compose(&self, other: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.cols != other.rows {
            return Err(Error::LabelMismatch("inner label sets differ".into()));
        }
        let p = (0..self.rows.len())
            .map(|i| {
                (0..other.cols.len())
                    .map(|k| {
                        (0..self.cols.len())
                            .fold(Rational::zero(), |acc, j| acc + &self.p[i][j] * &other.p[j][k])
                    })
                    .collect()
            })
            .collect();
        StochasticMatrix::new(self.rows.clone(), other.cols.clone(), p)
    }
}

/// `A(x) = Σ_y p(x|y) M(y)`; the columns of `p` are matched to `M`'s labels
/// by name.
pub fn post_process(m: &Evm, p: &StochasticMatrix) -> Result<Evm> {
    if p.cols.len() != m.len() {
        return Err(Error::LabelMismatch("columns must be the measurement's outcomes".into()));
    }
    let mut cols = Vec::with_capacity(m.len());
    for c in &p.cols {
        cols.push(
            m.index_of(c)
                .ok_or_else(|| Error::LabelMismatch(format!("column {c:?} is not an outcome")))?,
        );
    }
    let effects = p
        .p
        .iter()
        .map(|row| {
            let mut v = zeros(m.space.dim());
            for (w, &y) in row.iter().zip(&cols) {
                axpy(&mut v, w, &m.effects[y]);
            }
            v
        })
        .collect();
    Ok(Evm::from_parts_unchecked(m.space.clone(), p.rows.clone(), effects))
}

impl OutcomePartition {
    pub fn new(blocks: Vec<Vec<String>>) -> Self {
        OutcomePartition { blocks }
    }

    /// Every outcome in its own block.
    pub fn singletons(m: &Evm) -> Self {
        OutcomePartition::new(m.labels.iter().map(|l| alloc::vec![l.clone()]).collect())
    }

    pub fn blocks(&self) -> &[Vec<String>] {
        &self.blocks
    }

    /// Label of block `i`: `"{a,b,...}"`, or the member itself for
    /// singletons.
    pub fn block_label(&self, i: usize) -> String {
        let b = &self.blocks[i];
        if b.len() == 1 {
            b[0].clone()
        } else {
            format!("{{{}}}", b.join(","))
        }
    }

    fn check_covers(&self, m: &Evm) -> Result<()> {
        let mut seen = alloc::vec![false; m.len()];
        for block in &self.blocks {
            if block.is_empty() {
                return Err(Error::NotAPartition("empty block".into()));
            }
            for l in block {
                let i = m
                    .index_of(l)
                    .ok_or_else(|| Error::NotAPartition(format!("{l:?} is not an outcome")))?;
                if seen[i] {
                    return Err(Error::NotAPartition(format!("{l:?} appears twice")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::NotAPartition(format!("{:?} is not covered", m.labels[i])));
        }
        Ok(())
    }

    /// Deterministic block matrix: `p(block | y) = 1` iff `y ∈ block`.
    pub fn block_matrix(&self, m: &Evm) -> Result<StochasticMatrix> {
        self.check_covers(m)?;
        let rows: Vec<String> = (0..self.blocks.len()).map(|i| self.block_label(i)).collect();
        let p = self
            .blocks
            .iter()
            .map(|block| {
                m.labels
                    .iter()
                    .map(|l| if block.contains(l) { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        StochasticMatrix::new(rows, m.labels.clone(), p)
    }
}

/// One effect per block, the sum over the block.
pub fn coarse_grain(m: &Evm, partition: &OutcomePartition) -> Result<Evm> {
    post_process(m, &partition.block_matrix(m)?)
}

/// Drops zero effects and merges proportional ones. The merged outcome keeps
/// the lexicographically least label of its group; groups appear in order of
/// their first member.
pub fn minimal_sufficient(m: &Evm) -> Evm {
    let (labels, effects, _) = merge_groups(m);
    Evm::from_parts_unchecked(m.space.clone(), labels, effects)
}

/// Like [`minimal_sufficient`] plus the two stochastic matrices relating the
/// reduced measurement `R` and `M`: `(merge, split)` with
/// `R = post_process(M, merge)` and `M = post_process(R, split)`.
pub fn minimal_sufficient_with_witnesses(m: &Evm) -> (Evm, StochasticMatrix, StochasticMatrix) {
    let (labels, effects, groups) = merge_groups(m);
    let reduced = Evm::from_parts_unchecked(m.space.clone(), labels.clone(), effects);
    let n = m.len();
    // merge: p(g | y) = 1 if y in group g; zero effects go to group 0.
    let mut merge = alloc::vec![zeros(n); labels.len()];
    // split: p(y | g) = c_y where M(y) = c_y R(g); zero outcomes get no mass.
    let mut split = alloc::vec![zeros(labels.len()); n];
    let mut assigned = alloc::vec![false; n];
    for (g, members) in groups.iter().enumerate() {
        for (y, c) in members {
            merge[g][*y] = Rational::one();
            split[*y][g] = c.clone();
            assigned[*y] = true;
        }
    }
    for y in (0..n).filter(|&y| !assigned[y]) {
        merge[0][y] = Rational::one();
    }
    let merge = StochasticMatrix { rows: labels.clone(), cols: m.labels.clone(), p: merge };
    let split = StochasticMatrix { rows: m.labels.clone(), cols: labels, p: split };
    (reduced, merge, split)
}

type Groups = Vec<Vec<(usize, Rational)>>;

fn merge_groups(m: &Evm) -> (Vec<String>, Vec<Vector>, Groups) {
    let mut sums: Vec<Vector> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, e) in m.effects.iter().enumerate() {
        if is_zero_vec(e) {
            continue;
        }
        match sums.iter().position(|s| proportionality_factor(e, s).is_some()) {
            Some(g) => {
                add_assign(&mut sums[g], e);
                members[g].push(i);
            }
            None => {
                sums.push(e.clone());
                members.push(alloc::vec![i]);
            }
        }
    }
    let labels = members
        .iter()
        .map(|ms| ms.iter().map(|&i| &m.labels[i]).min().unwrap().clone())
        .collect();
    let groups = members
        .iter()
        .zip(&sums)
        .map(|(ms, s)| {
            ms.iter()
                .map(|&i| (i, proportionality_factor(&m.effects[i], s).expect("same ray")))
                .collect()
        })
        .collect();
    (labels, sums, groups)
}

/// Extremality: the effects of the minimally sufficient representative are
/// linearly independent.
pub fn is_extremal(m: &Evm) -> bool {
    let r = minimal_sufficient(m);
    rank(&r.effects) == r.len()
}
