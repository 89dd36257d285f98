//! The post-processing preorder `A ⪯ B` ("`A` is a classical garbling of
//! `B`"), decided by linear programming with a certificate either way.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::Result;
use crate::evm::{check_same_space, post_process, Evm, StochasticMatrix};
use crate::gain::{decompose_family, gain_value, Ensemble, Functional, WStarFamily};
use crate::lp::{self, Bound, LpBuilder, LpOutcome, Sense};
use crate::rational::{scale, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum OrderVerdict {
    /// `A = post_process(B, witness)`.
    Below { witness: StochasticMatrix },
    /// `gain(separator, A) = gain_a > gain_b = gain(separator, B)`.
    NotBelow {
        separator: Ensemble,
        gain_a: Rational,
        gain_b: Rational,
    },
}

impl OrderVerdict {
    pub fn is_below(&self) -> bool {
        matches!(self, OrderVerdict::Below { .. })
    }

    /// Re-checks the verdict for the pair `(a, b)` by direct arithmetic.
    pub fn verify(&self, a: &Evm, b: &Evm) -> bool {
        match self {
            OrderVerdict::Below { witness } => post_process(b, witness).is_ok_and(|p| p == *a),
            OrderVerdict::NotBelow { separator, gain_a, gain_b } => {
                gain_a > gain_b
                    && gain_value(separator.family(), a).is_ok_and(|g| g == *gain_a)
                    && gain_value(separator.family(), b).is_ok_and(|g| g == *gain_b)
            }
        }
    }
}

/// Decides whether `a` is a post-processing of `b`.
pub fn test_post_processing(a: &Evm, b: &Evm) -> Result<OrderVerdict> {
    check_same_space(a, b)?;
    let space = a.space();
    let (nx, ny) = (a.len(), b.len());
    let mut lp = LpBuilder::new(Sense::Minimize);
    // p(x|y) at index x * ny + y
    let p = lp.add_vars(nx * ny, Bound::NonNegative);
    let mut effect_rows = Vec::with_capacity(nx);
    for (x, ax) in a.effects().iter().enumerate() {
        let terms = b
            .effects()
            .iter()
            .enumerate()
            .map(|(y, by)| (p.start + x * ny + y, Rational::one(), by.as_slice()));
        effect_rows.push(lp.add_vector_eq(terms, ax));
    }
    for y in 0..ny {
        lp.add_eq((0..nx).map(|x| (p.start + x * ny + y, Rational::one())).collect(), Rational::one());
    }
    let problem = lp.build();
    match lp::solve(&problem)? {
        LpOutcome::Optimal { primal, .. } => {
            let entries = (0..nx).map(|x| primal[x * ny..(x + 1) * ny].to_vec()).collect();
            let witness = StochasticMatrix::new(a.labels().to_vec(), b.labels().to_vec(), entries)?;
            Ok(OrderVerdict::Below { witness })
        }
        LpOutcome::Infeasible { farkas } => {
            // ψ_x = -φ_x satisfies Σ_x ⟨ψ_x, A(x)⟩ > Σ_y μ_y >= gain(ψ; B).
            let psi: Vec<Functional> = effect_rows
                .iter()
                .map(|rows| Functional::new(scale(&-Rational::one(), &farkas.eq[rows.clone()])))
                .collect();
            let family = WStarFamily::new(a.labels().to_vec(), psi)?;
            let separator = decompose_family(space, &family)?.ensemble;
            let gain_a = gain_value(separator.family(), a)?;
            let gain_b = gain_value(separator.family(), b)?;
            debug_assert!(gain_a > gain_b);
            Ok(OrderVerdict::NotBelow { separator, gain_a, gain_b })
        }
        LpOutcome::Unbounded { .. } => unreachable!("zero objective"),
    }
}

/// Both directions of the preorder.
#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    /// `a ⪯ b`
    pub forward: OrderVerdict,
    /// `b ⪯ a`
    pub backward: OrderVerdict,
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        self.forward.is_below() && self.backward.is_below()
    }

    pub fn verify(&self, a: &Evm, b: &Evm) -> bool {
        self.forward.verify(a, b) && self.backward.verify(b, a)
    }
}

pub fn test_equivalence(a: &Evm, b: &Evm) -> Result<Equivalence> {
    Ok(Equivalence {
        forward: test_post_processing(a, b)?,
        backward: test_post_processing(b, a)?,
    })
}

/// `gain_a - gain_b`, zero for `Below`.
pub fn separation_gap(v: &OrderVerdict) -> Rational {
    match v {
        OrderVerdict::Below { .. } => Rational::zero(),
        OrderVerdict::NotBelow { gain_a, gain_b, .. } => gain_a - gain_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evm::{coarse_grain, minimal_sufficient, trivial_evm, OutcomePartition};
    use crate::rational::{ivec, rat, vec_of};
    use crate::space::{standard_space, GptSpace, SpaceKind};
    use alloc::string::{String, ToString};
    use alloc::sync::Arc;
    use alloc::vec;

    fn sp(kind: SpaceKind) -> Arc<GptSpace> {
        Arc::new(standard_space(kind).unwrap())
    }

    fn evm(s: &Arc<GptSpace>, effects: &[(&str, Vec<Rational>)]) -> Evm {
        Evm::new(s.clone(), effects.iter().map(|(l, v)| (l.to_string(), v.clone())).collect()).unwrap()
    }

    fn gbit_pair() -> (Evm, Evm) {
        let g = sp(SpaceKind::Gbit);
        let mx = evm(&g, &[("+", vec_of(&[(1, 2), (1, 2), (0, 1)])), ("-", vec_of(&[(1, 2), (-1, 2), (0, 1)]))]);
        let mz = evm(&g, &[("+", vec_of(&[(1, 2), (0, 1), (1, 2)])), ("-", vec_of(&[(1, 2), (0, 1), (-1, 2)]))]);
        (mx, mz)
    }

    #[test]
    fn coarse_graining_is_below() {
        let b2 = sp(SpaceKind::Classical(3));
        let b = evm(&b2, &[("a", ivec(&[1, 0, 0])), ("b", ivec(&[0, 1, 0])), ("c", ivec(&[0, 0, 1]))]);
        let part = OutcomePartition::new(vec![vec!["a".into(), "c".into()], vec!["b".into()]]);
        let a = coarse_grain(&b, &part).unwrap();
        let v = test_post_processing(&a, &b).unwrap();
        assert!(v.is_below());
        assert!(v.verify(&a, &b));
        if let OrderVerdict::Below { witness } = &v {
            assert_eq!(witness, &part.block_matrix(&b).unwrap());
        }
    }

    #[test]
    fn trivial_is_below_everything() {
        let (mx, _) = gbit_pair();
        let t = trivial_evm(mx.space().clone(), &[("h".into(), rat(1, 3)), ("t".into(), rat(2, 3))]).unwrap();
        let v = test_post_processing(&t, &mx).unwrap();
        assert!(v.verify(&t, &mx));
        match v {
            OrderVerdict::Below { witness } => {
                assert_eq!(witness.entries(), &[vec![rat(1, 3); 2], vec![rat(2, 3); 2]]);
            }
            _ => panic!("expected Below"),
        }
    }

    #[test]
    fn gbit_axes_are_incomparable() {
        let (mx, mz) = gbit_pair();
        for (a, b) in [(&mx, &mz), (&mz, &mx)] {
            let v = test_post_processing(a, b).unwrap();
            assert!(!v.is_below());
            assert!(v.verify(a, b));
            assert!(separation_gap(&v) > Rational::zero());
        }
        assert!(!test_equivalence(&mx, &mz).unwrap().is_equivalent());
    }

    #[test]
    fn equivalence_examples() {
        let b2 = sp(SpaceKind::Classical(2));
        let m = evm(&b2, &[("a", vec_of(&[(1, 2), (0, 1)])), ("b", vec_of(&[(1, 2), (0, 1)])), ("c", ivec(&[0, 1]))]);
        let r = minimal_sufficient(&m);
        let e = test_equivalence(&m, &r).unwrap();
        assert!(e.is_equivalent() && e.verify(&m, &r));
        let relabeled = m.relabeled(vec![String::from("x"), "y".into(), "z".into()]).unwrap();
        let e = test_equivalence(&m, &relabeled).unwrap();
        assert!(e.is_equivalent() && e.verify(&m, &relabeled));
    }

    #[test]
    fn space_mismatch() {
        let (mx, _) = gbit_pair();
        let b2 = sp(SpaceKind::Classical(2));
        let id = evm(&b2, &[("a", ivec(&[1, 0])), ("b", ivec(&[0, 1]))]);
        assert_eq!(test_post_processing(&mx, &id).unwrap_err(), crate::Error::SpaceMismatch);
    }
}
