use std::sync::Arc;

use gptm_core::evm::{mix_direct_sum, mix_pointwise, post_process, Evm};
use gptm_core::experiments::{blackwell_compare, evm_to_experiment, experiment_to_evm, point_states};
use gptm_core::gain::{conic_gain_eval, gain_value, Ensemble};
use gptm_core::incompatibility::{is_compatible, r_inc, CompatVerdict};
use gptm_core::lp::{solve, verify_certificate, Bound, LpBuilder, LpOutcome, Sense};
use gptm_core::order::{test_post_processing, OrderVerdict};
use gptm_core::random::{index_labels, random_ensemble, random_evm, random_experiment, random_stochastic_matrix};
use gptm_core::rational::{int, rat};
use gptm_core::simulability::{is_simulable, q_succ, r_uns};
use gptm_core::space::{standard_space, ConeCertificate, GptSpace, SpaceKind};
use gptm_core::Rational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sp(kind: SpaceKind) -> Arc<GptSpace> {
    Arc::new(standard_space(kind).unwrap())
}

fn pool() -> Vec<Arc<GptSpace>> {
    vec![sp(SpaceKind::Classical(2)), sp(SpaceKind::Classical(3)), sp(SpaceKind::Gbit), sp(SpaceKind::Polygon(5))]
}

fn small(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-3..=3), rng.gen_range(1..=2))
}

fn evm_upto(rng: &mut ChaCha8Rng, s: &Arc<GptSpace>, max: usize) -> Evm {
    let n = rng.gen_range(1..=max);
    random_evm(rng, s, n)
}

fn garbled(rng: &mut ChaCha8Rng, b: &Evm) -> Evm {
    let rows = index_labels(rng.gen_range(1..=3));
    post_process(b, &random_stochastic_matrix(rng, &rows, b.labels())).unwrap()
}

#[test]
fn random_programs_certify_and_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut kinds = [0usize; 3];
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
        let mut b = LpBuilder::new(sense);
        for _ in 0..n {
            let bound = if rng.gen_bool(0.8) { Bound::NonNegative } else { Bound::Free };
            let c = small(&mut rng);
            b.add_var(bound, c);
        }
        let rows = rng.gen_range(1..=12);
        for _ in 0..rows {
            let mut terms: Vec<(usize, Rational)> = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.6) {
                    terms.push((j, small(&mut rng)));
                }
            }
            let rhs = small(&mut rng);
            if rng.gen_bool(0.3) {
                b.add_eq(terms, rhs);
            } else {
                b.add_le(terms, rhs);
            }
        }
        let p = b.build();
        let o = solve(&p).unwrap();
        assert!(verify_certificate(&p, &o), "{p:?}");
        assert_eq!(solve(&p).unwrap(), o);
        kinds[match o {
            LpOutcome::Optimal { .. } => 0,
            LpOutcome::Infeasible { .. } => 1,
            LpOutcome::Unbounded { .. } => 2,
        }] += 1;
    }
    assert!(kinds.iter().all(|&k| k > 0), "outcome mix {kinds:?}");
}

#[test]
fn cone_certificates_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    for s in pool().iter().chain([sp(SpaceKind::Polygon(7))].iter()) {
        for g in s.generators() {
            assert!(s.cone_member(g).unwrap().is_member());
        }
        for _ in 0..30 {
            let v: Vec<Rational> = (0..s.dim()).map(|_| small(&mut rng)).collect();
            let cert = s.cone_member(&v).unwrap();
            assert!(s.verify_cone_certificate(&v, &cert));
            if let ConeCertificate::Separated { functional } = cert {
                assert!(s.dual_cone_member(&functional).unwrap().is_positive());
                assert!(functional.pair(&v).is_negative());
            }
        }
    }
}

#[test]
fn classicality_of_polygons() {
    for k in 3..=12 {
        assert_eq!(sp(SpaceKind::Polygon(k)).is_classical(), k == 3, "polygon({k})");
    }
}

#[test]
fn classical_product_is_commutative_and_associative() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let s = sp(SpaceKind::Classical(3));
    let e = |i: usize| (0..3).map(|j| int((i == j) as i64)).collect::<Vec<_>>();
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { e(i) } else { vec![Rational::zero(); 3] };
            assert_eq!(s.classical_product(&e(i), &e(j)).unwrap(), expected);
        }
    }
    for _ in 0..100 {
        let [a, b, c]: [Vec<Rational>; 3] = std::array::from_fn(|_| (0..3).map(|_| small(&mut rng)).collect());
        let ab = s.classical_product(&a, &b).unwrap();
        assert_eq!(ab, s.classical_product(&b, &a).unwrap());
        let left = s.classical_product(&ab, &c).unwrap();
        let right = s.classical_product(&a, &s.classical_product(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}

#[test]
fn gain_is_homogeneous_and_affine() {
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    for s in pool() {
        for _ in 0..10 {
            let (a, b) = (evm_upto(&mut rng, &s, 3), evm_upto(&mut rng, &s, 3));
            let e = random_ensemble(&mut rng, &s, 2);
            let alpha = rat(rng.gen_range(0..=5), 3);
            assert_eq!(gain_value(&e.family().scaled(&alpha), &a).unwrap(), &alpha * gain_value(e.family(), &a).unwrap());
            let lambda = rat(rng.gen_range(0..=4), 4);
            let mixed = mix_direct_sum(&lambda, &a, &b).unwrap();
            let expected = &lambda * gain_value(e.family(), &a).unwrap()
                + (Rational::one() - &lambda) * gain_value(e.family(), &b).unwrap();
            assert_eq!(gain_value(e.family(), &mixed).unwrap(), expected);
        }
    }
}

#[test]
fn gain_order_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(204);
    for s in pool() {
        for _ in 0..8 {
            let b = evm_upto(&mut rng, &s, 3);
            let a = garbled(&mut rng, &b);
            let terms: Vec<(Rational, Ensemble)> =
                (0..3).map(|i| (rat(rng.gen_range(0..=3), 2), random_ensemble(&mut rng, &s, 1 + i))).collect();
            let alpha = rat(rng.gen_range(-2..=2), 3);
            assert!(conic_gain_eval(&alpha, &terms, &a).unwrap() <= conic_gain_eval(&alpha, &terms, &b).unwrap());
            for (_, e) in &terms {
                let g = gain_value(e.family(), &a).unwrap();
                let best_weight = e.family().functionals().iter().map(|f| f.pair(s.order_unit())).max().unwrap();
                assert!(g >= best_weight);
            }
        }
    }
}

#[test]
fn order_is_reflexive_and_transitive() {
    let mut rng = ChaCha8Rng::seed_from_u64(205);
    for s in pool() {
        for _ in 0..8 {
            let c = evm_upto(&mut rng, &s, 3);
            let b = garbled(&mut rng, &c);
            let a = garbled(&mut rng, &b);
            assert!(test_post_processing(&c, &c).unwrap().verify(&c, &c));
            let (OrderVerdict::Below { witness: ab }, OrderVerdict::Below { witness: bc }) =
                (test_post_processing(&a, &b).unwrap(), test_post_processing(&b, &c).unwrap())
            else {
                panic!("constructed garblings must be below");
            };
            let composite = ab.compose(&bc).unwrap();
            assert_eq!(post_process(&c, &composite).unwrap(), a);
            assert!(test_post_processing(&a, &c).unwrap().is_below());
        }
    }
}

#[test]
fn unsimulability_is_monotone_under_post_processing() {
    let mut rng = ChaCha8Rng::seed_from_u64(206);
    for s in pool() {
        for _ in 0..6 {
            let b = evm_upto(&mut rng, &s, 3);
            let a = garbled(&mut rng, &b);
            let sims = vec![evm_upto(&mut rng, &s, 2)];
            assert!(r_uns(&a, &sims).unwrap().value <= r_uns(&b, &sims).unwrap().value);
        }
    }
}

#[test]
fn success_probability_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(207);
    let res = rat(1, 1024);
    for s in pool() {
        for _ in 0..3 {
            let m = evm_upto(&mut rng, &s, 2);
            let sims = vec![evm_upto(&mut rng, &s, 2)];
            let rep = q_succ(&m, &sims).unwrap();
            let u = gptm_core::evm::unit_evm(s.clone(), "u");
            let feasible = |q: &Rational| is_simulable(&mix_direct_sum(q, &m, &u).unwrap(), &sims).unwrap().is_simulable();
            let (mut lo, mut hi) = (Rational::zero(), Rational::one());
            if feasible(&hi) {
                lo = hi.clone();
            } else {
                while &hi - &lo > res {
                    let mid = (&lo + &hi) / int(2);
                    if feasible(&mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            assert!(rep.value >= lo && rep.value <= hi, "q = {} outside [{lo}, {hi}]", rep.value);
        }
    }
}

#[test]
fn incompatibility_is_monotone_and_margins_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(208);
    let g = sp(SpaceKind::Gbit);
    for _ in 0..8 {
        let family: Vec<Evm> = (0..2).map(|_| evm_upto(&mut rng, &g, 2)).collect();
        let garbled_family: Vec<Evm> = family.iter().map(|m| garbled(&mut rng, m)).collect();
        assert!(r_inc(&garbled_family).unwrap().value <= r_inc(&family).unwrap().value);
        if let CompatVerdict::Compatible(j) = is_compatible(&family).unwrap() {
            for (x, m) in family.iter().enumerate() {
                assert_eq!(j.margin(x), *m);
            }
        }
    }
    // noise toward the coin decreases incompatibility of the axes
    let x = Evm::new(g.clone(), vec![("+".into(), vec![rat(1, 2), rat(1, 2), rat(0, 1)]), ("-".into(), vec![rat(1, 2), rat(-1, 2), rat(0, 1)])]).unwrap();
    let z = Evm::new(g.clone(), vec![("+".into(), vec![rat(1, 2), rat(0, 1), rat(1, 2)]), ("-".into(), vec![rat(1, 2), rat(0, 1), rat(-1, 2)])]).unwrap();
    let coin = gptm_core::evm::trivial_evm(g.clone(), &[("+".into(), rat(1, 2)), ("-".into(), rat(1, 2))]).unwrap();
    let noisy: Vec<Evm> = [&x, &z].iter().map(|m| mix_pointwise(&rat(1, 2), m, &coin).unwrap()).collect();
    assert!(r_inc(&noisy).unwrap().value < r_inc(&[x, z]).unwrap().value);
}

#[test]
fn experiments_round_trip_and_order_gain() {
    let mut rng = ChaCha8Rng::seed_from_u64(209);
    for _ in 0..20 {
        let params = index_labels(rng.gen_range(2..=3));
        let (s1, s2) = (index_labels(rng.gen_range(1..=3)), index_labels(rng.gen_range(1..=3)));
        let e1 = random_experiment(&mut rng, &params, &s1);
        let e2 = random_experiment(&mut rng, &params, &s2);
        let m1 = experiment_to_evm(&e1).unwrap();
        assert_eq!(evm_to_experiment(&m1, &point_states(&params)).unwrap(), e1);
        assert!(blackwell_compare(&e1, &e1).unwrap().is_below());
        if blackwell_compare(&e1, &e2).unwrap().is_below() {
            let m2 = experiment_to_evm(&e2).unwrap();
            for _ in 0..10 {
                let ens = random_ensemble(&mut rng, m1.space(), params.len());
                assert!(gain_value(ens.family(), &m1).unwrap() <= gain_value(ens.family(), &m2).unwrap());
            }
        }
    }
}
