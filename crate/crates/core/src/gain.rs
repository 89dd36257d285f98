//! Functionals, ensembles and the gain (state discrimination) functional.
//!
//! For a finite-outcome EVM `M` and a family `(φ_y)` the gain is
//! `Σ_x max_y ⟨φ_y, M(x)⟩`: the best guessing score when the label `y` is
//! guessed from the outcome `x`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::evm::Evm;
use crate::rational::{ceil_power_of_two, dot, int, Rational, Vector};
use crate::space::GptSpace;

/// A linear functional on `E`, paired with vectors by the coordinate dot
/// product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Functional {
    coords: Vector,
}

impl Functional {
    pub fn new(coords: Vector) -> Self {
        Functional { coords }
    }

    pub fn zero(dim: usize) -> Self {
        Functional::new(crate::rational::zeros(dim))
    }

    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    pub fn into_coords(self) -> Vector {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn pair(&self, v: &[Rational]) -> Rational {
        dot(&self.coords, v)
    }

    pub fn scaled(&self, s: &Rational) -> Functional {
        Functional::new(crate::rational::scale(s, &self.coords))
    }

    pub fn plus(&self, other: &Functional) -> Functional {
        Functional::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }
}

/// A finite labeled family of functionals with no positivity requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WStarFamily {
    labels: Vec<String>,
    functionals: Vec<Functional>,
}

impl WStarFamily {
    pub fn new(labels: Vec<String>, functionals: Vec<Functional>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyList);
        }
        if labels.len() != functionals.len() {
            return Err(Error::LabelMismatch(alloc::format!(
                "{} labels for {} functionals",
                labels.len(),
                functionals.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let dim = functionals[0].dim();
        if let Some(f) = functionals.iter().find(|f| f.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: f.dim() });
        }
        Ok(WStarFamily { labels, functionals })
    }

    /// Family labeled `"0"`, `"1"`, ...
    pub fn indexed(functionals: Vec<Functional>) -> Result<Self> {
        let labels = (0..functionals.len()).map(|i| alloc::format!("{i}")).collect();
        WStarFamily::new(labels, functionals)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.functionals[0].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Functional)> {
        self.labels.iter().zip(&self.functionals)
    }

    /// `Σ_x ⟨φ_x, u⟩`
    pub fn total_weight(&self, space: &GptSpace) -> Rational {
        self.functionals
            .iter()
            .fold(Rational::zero(), |acc, f| acc + f.pair(space.order_unit()))
    }

    pub fn scaled(&self, s: &Rational) -> WStarFamily {
        WStarFamily {
            labels: self.labels.clone(),
            functionals: self.functionals.iter().map(|f| f.scaled(s)).collect(),
        }
    }

    /// Loss-style family `(-φ_x)`.
    pub fn negated(&self) -> WStarFamily {
        self.scaled(&int(-1))
    }

    fn all_positive(&self, space: &GptSpace) -> bool {
        self.functionals
            .iter()
            .all(|f| space.dual_cone_member(f).is_ok_and(|v| v.is_positive()))
    }
}

/// A family of dual-cone functionals whose weights `⟨φ_x, u⟩` sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    space: Arc<GptSpace>,
    family: WStarFamily,
}

impl Ensemble {
    pub fn new(space: Arc<GptSpace>, family: WStarFamily) -> Result<Self> {
        check_family_dim(&space, &family)?;
        if !family.all_positive(&space) {
            return Err(Error::NotAnEnsemble("functional outside the dual cone".into()));
        }
        if family.total_weight(&space) != int(1) {
            return Err(Error::NotAnEnsemble("weights do not sum to one".into()));
        }
        Ok(Ensemble { space, family })
    }

    pub fn family(&self) -> &WStarFamily {
        &self.family
    }

    pub fn space(&self) -> &Arc<GptSpace> {
        &self.space
    }
}

impl AsRef<WStarFamily> for Ensemble {
    fn as_ref(&self) -> &WStarFamily {
        &self.family
    }
}

/// Sub-families `E_x = (φ_{x,y})_y` of dual-cone functionals with total
/// weight one across all parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedEnsemble {
    space: Arc<GptSpace>,
    parts: Vec<WStarFamily>,
}

impl PartitionedEnsemble {
    pub fn new(space: Arc<GptSpace>, parts: Vec<WStarFamily>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyList);
        }
        let mut total = Rational::zero();
        for part in &parts {
            check_family_dim(&space, part)?;
            if !part.all_positive(&space) {
                return Err(Error::NotAnEnsemble("functional outside the dual cone".into()));
            }
            total += part.total_weight(&space);
        }
        if total != int(1) {
            return Err(Error::NotAnEnsemble("weights do not sum to one".into()));
        }
        Ok(PartitionedEnsemble { space, parts })
    }

    /// A single-part partitioned ensemble.
    pub fn single(ensemble: &Ensemble) -> Self {
        PartitionedEnsemble {
            space: ensemble.space.clone(),
            parts: alloc::vec![ensemble.family.clone()],
        }
    }

    pub fn parts(&self) -> &[WStarFamily] {
        &self.parts
    }

    pub fn space(&self) -> &Arc<GptSpace> {
        &self.space
    }
}

fn check_family_dim(space: &GptSpace, family: &WStarFamily) -> Result<()> {
    if family.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: family.dim() });
    }
    Ok(())
}

/// Gain value together with an optimal deterministic guessing rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gain {
    pub value: Rational,
    /// `(outcome label, guessed family label)` per outcome.
    pub rule: Vec<(String, String)>,
}

/// `Σ_x max_y ⟨φ_y, M(x)⟩`, ties in the guess resolved to the
/// lexicographically least family label.
pub fn gain(family: &WStarFamily, m: &Evm) -> Result<Gain> {
    if family.dim() != m.space().dim() {
        return Err(Error::DimensionMismatch { expected: m.space().dim(), found: family.dim() });
    }
    let mut value = Rational::zero();
    let mut rule = Vec::with_capacity(m.len());
    for (x, effect) in m.iter() {
        let mut best: Option<(Rational, &String)> = None;
        for (label, phi) in family.iter() {
            let v = phi.pair(effect);
            best = match best {
                Some((bv, bl)) if bv > v || (bv == v && bl <= label) => Some((bv, bl)),
                _ => Some((v, label)),
            };
        }
        let (v, label) = best.expect("family is nonempty");
        value += v;
        rule.push((x.clone(), label.clone()));
    }
    Ok(Gain { value, rule })
}

pub fn gain_value(family: &WStarFamily, m: &Evm) -> Result<Rational> {
    Ok(gain(family, m)?.value)
}

/// Best gain over a finite list of measurements. The supremum over the
/// convex hull of post-processings is attained at a list member because the
/// gain is affine and monotone.
pub fn gain_set(family: &WStarFamily, ms: &[Evm]) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for m in ms {
        let v = gain_value(family, m)?;
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    best.ok_or(Error::EmptyList)
}

/// `Σ_x gain_set(E_x, ms)`: the label `x` of the part is announced before
/// the measurement is chosen.
pub fn gain_partitioned(pe: &PartitionedEnsemble, ms: &[Evm]) -> Result<Rational> {
    let mut total = Rational::zero();
    for part in pe.parts() {
        total += gain_set(part, ms)?;
    }
    Ok(total)
}

/// `φ_x = α φ'_x + ψ` with `(φ'_x)` an ensemble and `α > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub alpha: Rational,
    pub ensemble: Ensemble,
    pub shift: Functional,
}

impl Decomposition {
    /// `gain(family, M) = α gain(E', M) + ⟨ψ, u⟩`
    pub fn reconstruct_gain(&self, ensemble_gain: &Rational) -> Rational {
        &self.alpha * ensemble_gain + self.shift.pair(self.ensemble.space.order_unit())
    }
}

/// Rescales an arbitrary family into an ensemble. The shift is `-β σ` with
/// `σ` the space's interior state and `β` zero when the family is already
/// positive, otherwise the least power of two making every `φ_x + β σ`
/// positive.
pub fn decompose_family(space: &Arc<GptSpace>, family: &WStarFamily) -> Result<Decomposition> {
    check_family_dim(space, family)?;
    let sigma = space.interior_state();
    // Least β with ⟨φ_x + βσ, g⟩ >= 0 for all x and generators g.
    let mut needed = Rational::zero();
    for phi in family.functionals() {
        for g in space.generators() {
            let v = phi.pair(g);
            if v.is_negative() {
                let beta = -v / sigma.pair(g);
                if beta > needed {
                    needed = beta;
                }
            }
        }
    }
    let mut beta = if needed.is_zero() { Rational::zero() } else { ceil_power_of_two(&needed) };
    let mut alpha = family.total_weight(space) + &beta * int(family.len() as i64);
    if alpha.is_zero() {
        // Positive family vanishing on u: every φ_x is zero.
        beta = int(1);
        alpha = int(family.len() as i64);
    }
    let shifted: Vec<Functional> = family
        .functionals()
        .iter()
        .map(|phi| phi.plus(&sigma.scaled(&beta)).scaled(&alpha.recip()))
        .collect();
    let ensemble = Ensemble::new(
        space.clone(),
        WStarFamily::new(family.labels().to_vec(), shifted)?,
    )?;
    Ok(Decomposition {
        alpha,
        ensemble,
        shift: sigma.scaled(&-beta),
    })
}

/// Evaluates `α + Σ_i β_i gain(E_i, M)`, a monotone conic combination.
pub fn conic_gain_eval(alpha: &Rational, terms: &[(Rational, Ensemble)], m: &Evm) -> Result<Rational> {
    let mut total = alpha.clone();
    for (beta, e) in terms {
        if beta.is_negative() {
            return Err(Error::NotAnEnsemble("negative conic weight".into()));
        }
        total += beta * gain_value(e.family(), m)?;
    }
    Ok(total)
}
