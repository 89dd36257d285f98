//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Every expected value comes from an oracle written
//! here, independent of the library code path under test.

use std::sync::Arc;
use std::time::{Duration, Instant};

use gptm_core::evm::{coarse_grain, minimal_sufficient, mix_direct_sum, post_process, trivial_evm, unit_evm, Evm};
use gptm_core::experiments::{blackwell_compare, StatExperiment};
use gptm_core::gain::{gain_partitioned, gain_set, gain_value, Functional, WStarFamily};
use gptm_core::incompatibility::{is_compatible, p_g_comp, r_inc, CompatVerdict};
use gptm_core::lp::{self, verify_certificate, Bound, LpBuilder, LpOutcome, Sense};
use gptm_core::order::{test_equivalence, test_post_processing, OrderVerdict};
use gptm_core::random::{index_labels, random_ensemble, random_evm, random_partition, random_partitioned_ensemble, random_stochastic_matrix};
use gptm_core::simulability::{is_simulable, q_succ, r_uns};
use gptm_core::space::{standard_space, GptSpace, SpaceKind};
use gptm_core::Rational;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn space(kind: SpaceKind) -> Arc<GptSpace> {
    Arc::new(standard_space(kind).unwrap())
}

fn evm(s: &Arc<GptSpace>, effects: Vec<(&str, Vec<Rational>)>) -> Evm {
    Evm::new(s.clone(), effects.into_iter().map(|(l, v)| (l.to_string(), v)).collect()).unwrap()
}

fn gbit_axes() -> (Evm, Evm) {
    let g = space(SpaceKind::Gbit);
    let h = r(1, 2);
    let z = Rational::zero();
    let mx = evm(&g, vec![("+", vec![h.clone(), h.clone(), z.clone()]), ("-", vec![h.clone(), -h.clone(), z.clone()])]);
    let mz = evm(&g, vec![("+", vec![h.clone(), z.clone(), h.clone()]), ("-", vec![h.clone(), z, -h])]);
    (mx, mz)
}

fn bit_identity() -> Evm {
    let c = space(SpaceKind::Classical(2));
    evm(&c, vec![("a", vec![r(1, 1), r(0, 1)]), ("b", vec![r(0, 1), r(1, 1)])])
}

fn coin(s: &Arc<GptSpace>) -> Evm {
    trivial_evm(s.clone(), &[("h".into(), r(1, 2)), ("t".into(), r(1, 2))]).unwrap()
}

/// Gaussian elimination rank, kept local so the oracle shares no code with
/// the library.
fn oracle_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rank][c];
                let pivot = m[rank].clone();
                for (a, b) in m[i].iter_mut().zip(&pivot) {
                    *a -= &f * b;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn evm_upto(rng: &mut ChaCha8Rng, s: &Arc<GptSpace>, max: usize) -> Evm {
    let n = rng.gen_range(1..=max);
    random_evm(rng, s, n)
}

/// `{t g, u - t g}` for the generator `g` at `index`, with `t` a random fraction
/// of the largest scale keeping `u - t g` in the cone.
fn sharp_binary(rng: &mut ChaCha8Rng, s: &Arc<GptSpace>, index: usize) -> Evm {
    let g = s.generators()[index].clone();
    let mut b = LpBuilder::new(Sense::Maximize);
    let c = b.add_vars(s.generators().len(), Bound::NonNegative);
    let t = b.add_var(Bound::NonNegative, Rational::one());
    let terms: Vec<(usize, Rational, &[Rational])> = c
        .zip(s.generators())
        .map(|(j, h)| (j, Rational::one(), h.as_slice()))
        .chain(std::iter::once((t, Rational::one(), g.as_slice())))
        .collect();
    b.add_vector_eq(terms, s.order_unit());
    let LpOutcome::Optimal { value, .. } = lp::solve(&b.build()).unwrap() else { unreachable!() };
    let t = value * r(rng.gen_range(3..=4), 4);
    let e: Vec<Rational> = g.iter().map(|v| v * &t).collect();
    let rest: Vec<Rational> = s.order_unit().iter().zip(&e).map(|(u, v)| u - v).collect();
    evm(s, vec![("0", e), ("1", rest)])
}

fn sample_space(rng: &mut ChaCha8Rng, pool: &[Arc<GptSpace>]) -> Arc<GptSpace> {
    pool[rng.gen_range(0..pool.len())].clone()
}

fn small_pool() -> Vec<Arc<GptSpace>> {
    vec![
        space(SpaceKind::Classical(2)),
        space(SpaceKind::Classical(3)),
        space(SpaceKind::Gbit),
        space(SpaceKind::Polygon(3)),
    ]
}

/// Feasibility of `(M + r N)/(1 + r)` simulable by `sims`, built directly:
/// `Σ_{i,y} q_i(x|y) N_i(y) - M(x) ∈ E_+` with `Σ_x q_i(x|y) = λ_i`,
/// `Σ λ_i = 1 + r`.
fn noisy_simulable(m: &Evm, sims: &[Evm], noise: &Rational) -> bool {
    let s = m.space();
    let gens = s.generators();
    let mut b = LpBuilder::new(Sense::Minimize);
    let mut lambdas = Vec::new();
    let mut qs = Vec::new();
    for n in sims {
        let q = b.add_vars(m.len() * n.len(), Bound::NonNegative);
        let l = b.add_var(Bound::NonNegative, Rational::zero());
        for y in 0..n.len() {
            let mut terms: Vec<(usize, Rational)> = (0..m.len()).map(|x| (q.start + x * n.len() + y, Rational::one())).collect();
            terms.push((l, -Rational::one()));
            b.add_eq(terms, Rational::zero());
        }
        lambdas.push(l);
        qs.push(q.start);
    }
    b.add_eq(lambdas.iter().map(|&l| (l, Rational::one())).collect(), Rational::one() + noise);
    for (x, e) in m.effects().iter().enumerate() {
        let d = b.add_vars(gens.len(), Bound::NonNegative);
        let mut terms: Vec<(usize, Rational, &[Rational])> = Vec::new();
        for (i, n) in sims.iter().enumerate() {
            for (y, ny) in n.effects().iter().enumerate() {
                terms.push((qs[i] + x * n.len() + y, Rational::one(), ny.as_slice()));
            }
        }
        for (j, g) in d.zip(gens) {
            terms.push((j, -Rational::one(), g.as_slice()));
        }
        b.add_vector_eq(terms, e);
    }
    matches!(lp::solve(&b.build()).unwrap(), LpOutcome::Optimal { .. })
}

/// Bisection over `[lo, hi]` for the least value where `feasible` holds,
/// assuming monotonicity; returns the final bracket.
fn bisect(mut lo: Rational, mut hi: Rational, resolution: &Rational, feasible: impl Fn(&Rational) -> bool) -> (Rational, Rational) {
    while &hi - &lo > *resolution {
        let mid = (&lo + &hi) / r(2, 1);
        if feasible(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Feasibility of a cone-valued joint `G` on the product outcome set with
/// `Σ G = s u` and `margin_x G - M_x ∈ E_+`, built directly.
fn joint_with_mass(family: &[Evm], s: &Rational) -> bool {
    let sp = family[0].space();
    let gens = sp.generators();
    let sizes: Vec<usize> = family.iter().map(Evm::len).collect();
    let count: usize = sizes.iter().product();
    let tuple = |mut z: usize| {
        let mut t = vec![0; sizes.len()];
        for k in (0..sizes.len()).rev() {
            t[k] = z % sizes[k];
            z /= sizes[k];
        }
        t
    };
    let mut b = LpBuilder::new(Sense::Minimize);
    let c = b.add_vars(count * gens.len(), Bound::NonNegative);
    let all: Vec<(usize, Rational, &[Rational])> = (0..count)
        .flat_map(|z| gens.iter().enumerate().map(move |(k, g)| (c.start + z * gens.len() + k, Rational::one(), g.as_slice())))
        .collect();
    b.add_vector_eq(all, &sp.order_unit().iter().map(|v| v * s).collect::<Vec<_>>());
    for (x, m) in family.iter().enumerate() {
        for (y, e) in m.effects().iter().enumerate() {
            let d = b.add_vars(gens.len(), Bound::NonNegative);
            let mut terms: Vec<(usize, Rational, &[Rational])> = Vec::new();
            for z in (0..count).filter(|&z| tuple(z)[x] == y) {
                for (k, g) in gens.iter().enumerate() {
                    terms.push((c.start + z * gens.len() + k, Rational::one(), g.as_slice()));
                }
            }
            for (j, g) in d.zip(gens) {
                terms.push((j, -Rational::one(), g.as_slice()));
            }
            b.add_vector_eq(terms, e);
        }
    }
    matches!(lp::solve(&b.build()).unwrap(), LpOutcome::Optimal { .. })
}

fn pairwise_independent(effects: &[Vec<Rational>]) -> bool {
    // a, b proportional iff a_i b_j = a_j b_i for all i, j
    for i in 0..effects.len() {
        for j in i + 1..effects.len() {
            let (a, b) = (&effects[i], &effects[j]);
            let parallel = (0..a.len()).all(|p| (0..a.len()).all(|q| &a[p] * &b[q] == &a[q] * &b[p]));
            if parallel {
                return false;
            }
        }
    }
    effects.iter().all(|e| e.iter().any(|v| !v.is_zero()))
}

// ---------------------------------------------------------------------------

fn closed_form_gain_grid() -> Result<String, String> {
    let c = space(SpaceKind::Classical(2));
    let mut checked = 0;
    for qi in 1..=3 {
        let q = r(qi, 4);
        let mq = evm(&c, vec![("1", vec![Rational::one() - &q, r(0, 1)]), ("2", vec![q.clone(), r(1, 1)])]);
        for pi in 0..=8 {
            let p = r(pi, 8);
            let ep = WStarFamily::new(
                vec!["1".into(), "2".into()],
                vec![Functional::new(vec![r(0, 1), r(0, 1)]), Functional::new(vec![-p.clone(), Rational::one() - &p])],
            )
            .unwrap();
            let got = gain_value(&ep, &mq).unwrap();
            let expected = std::cmp::max(Rational::zero(), Rational::one() - (&q + Rational::one()) * &p);
            if got != expected {
                return Err(format!("p={p} q={q}: got {got}, expected {expected}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} grid points exact"))
}

fn witness_matrix_rank() -> Result<String, String> {
    let c = space(SpaceKind::Classical(2));
    let mut rows = Vec::new();
    for qi in 1..=5 {
        let q = r(qi, 6);
        let mq = evm(&c, vec![("1", vec![Rational::one() - &q, r(0, 1)]), ("2", vec![q.clone(), r(1, 1)])]);
        let mut row = Vec::new();
        for pj in 1..=5 {
            let p = r(pj, 10);
            let ep = WStarFamily::new(
                vec!["1".into(), "2".into()],
                vec![Functional::new(vec![r(0, 1), r(0, 1)]), Functional::new(vec![-p.clone(), Rational::one() - &p])],
            )
            .unwrap();
            let got = gain_value(&ep, &mq).unwrap();
            let expected = std::cmp::max(Rational::zero(), Rational::one() - (&q + Rational::one()) * &p);
            if got != expected {
                return Err(format!("entry q={q} p={p}: got {got}, expected {expected}"));
            }
            row.push(got);
        }
        rows.push(row);
    }
    let rank = oracle_rank(rows);
    if rank == 5 {
        Ok("rank 5".into())
    } else {
        Err(format!(
            "exact rank is {rank}, required 5: every p <= 1/2 lies below all kinks 1/(1+q) >= 6/11, so each entry is 1 - p - q p"
        ))
    }
}

struct UnsInstance {
    m: Evm,
    sims: Vec<Evm>,
}

struct IncInstance {
    family: Vec<Evm>,
}

fn uns_instances() -> Vec<UnsInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let pool = small_pool();
    (0..50)
        .map(|_| {
            let s = sample_space(&mut rng, &pool);
            let m = evm_upto(&mut rng, &s, 3);
            let k = rng.gen_range(1..=2);
            let sims = (0..k).map(|_| evm_upto(&mut rng, &s, 3)).collect();
            UnsInstance { m, sims }
        })
        .collect()
}

fn inc_instances() -> Vec<IncInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let pool = small_pool();
    let gbit = space(SpaceKind::Gbit);
    (0..50)
        .map(|i| {
            // every other instance is a pair of unsharp gbit axes, the only
            // nonclassical space in the pool
            if i % 2 == 0 {
                let (a, b) = sharp_axes(&mut rng, &gbit);
                return IncInstance { family: vec![sharp_binary(&mut rng, &gbit, a), sharp_binary(&mut rng, &gbit, b)] };
            }
            let s = sample_space(&mut rng, &pool);
            let k = rng.gen_range(1..=2);
            IncInstance { family: (0..k).map(|_| evm_upto(&mut rng, &s, 3)).collect() }
        })
        .collect()
}

/// Two generator indices that are neither equal nor complementary.
fn sharp_axes(rng: &mut ChaCha8Rng, s: &GptSpace) -> (usize, usize) {
    let gens = s.generators();
    loop {
        let (a, b) = (rng.gen_range(0..gens.len()), rng.gen_range(0..gens.len()));
        let sum: Vec<Rational> = gens[a].iter().zip(&gens[b]).map(|(x, y)| x + y).collect();
        let u = s.order_unit();
        let parallel = (0..u.len()).all(|p| (0..u.len()).all(|q| &sum[p] * &u[q] == &sum[q] * &u[p]));
        if a != b && !parallel {
            return (a, b);
        }
    }
}

fn strong_duality() -> Result<String, String> {
    let mut positive = (0, 0);
    for (i, inst) in uns_instances().iter().enumerate() {
        let rep = r_uns(&inst.m, &inst.sims).map_err(|e| format!("unsimulability #{i}: {e}"))?;
        let dp = rep.dual_problem.as_ref().unwrap();
        let dout = rep.dual_outcome.as_ref().unwrap();
        if !verify_certificate(&rep.primal_problem, &rep.primal_outcome) || !verify_certificate(dp, dout) {
            return Err(format!("unsimulability #{i}: certificate rejected"));
        }
        if rep.dual_value() != Some(rep.primal_value()) {
            return Err(format!("unsimulability #{i}: primal {} vs dual {:?}", rep.primal_value(), rep.dual_value()));
        }
        positive.0 += rep.value.is_positive() as usize;
    }
    for (i, inst) in inc_instances().iter().enumerate() {
        let rep = r_inc(&inst.family).map_err(|e| format!("incompatibility #{i}: {e}"))?;
        if !verify_certificate(&rep.primal_problem, &rep.primal_outcome) || !verify_certificate(&rep.dual_problem, &rep.dual_outcome) {
            return Err(format!("incompatibility #{i}: certificate rejected"));
        }
        if rep.dual_value() != Some(rep.primal_value()) {
            return Err(format!("incompatibility #{i}: primal {} vs dual {:?}", rep.primal_value(), rep.dual_value()));
        }
        positive.1 += rep.value.is_positive() as usize;
    }
    Ok(format!("50 + 50 instances, {} and {} with positive robustness", positive.0, positive.1))
}

fn unsimulability_tightness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    for (i, inst) in uns_instances().iter().enumerate() {
        let rep = r_uns(&inst.m, &inst.sims).map_err(|e| format!("#{i}: {e}"))?;
        let one_r = &rep.value + Rational::one();
        let e = rep.dual_ensemble.as_ref().ok_or(format!("#{i}: no dual ensemble"))?;
        let gm = gain_value(e.family(), &inst.m).unwrap();
        let gl = gain_set(e.family(), &inst.sims).unwrap();
        if gm != &one_r * &gl {
            return Err(format!("#{i}: gain {gm} vs (1+R) gain_set {}", &one_r * &gl));
        }
        let s = inst.m.space();
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            let ens = random_ensemble(&mut rng, s, n);
            let gm = gain_value(ens.family(), &inst.m).unwrap();
            let gl = gain_set(ens.family(), &inst.sims).unwrap();
            if gm > &one_r * &gl {
                return Err(format!("#{i}: random ensemble exceeds the bound"));
            }
        }
    }
    Ok("50 instances tight, 5000 random ensembles bounded".into())
}

fn incompatibility_tightness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    for (i, inst) in inc_instances().iter().enumerate() {
        let rep = r_inc(&inst.family).map_err(|e| format!("#{i}: {e}"))?;
        let one_r = &rep.value + Rational::one();
        let g = gain_partitioned(&rep.dual_ensemble, &inst.family).unwrap();
        let c = p_g_comp(&rep.dual_ensemble).unwrap();
        if g != &one_r * &c {
            return Err(format!("#{i}: gain {g} vs (1+R) comp {}", &one_r * &c));
        }
        let s = inst.family[0].space();
        for _ in 0..100 {
            let parts = rng.gen_range(1..=2);
            let sizes: Vec<usize> = (0..parts).map(|_| rng.gen_range(1..=3)).collect();
            let pe = random_partitioned_ensemble(&mut rng, s, &sizes);
            let g = gain_partitioned(&pe, &inst.family).unwrap();
            let c = p_g_comp(&pe).unwrap();
            if g > &one_r * &c {
                return Err(format!("#{i}: random partitioned ensemble exceeds the bound"));
            }
        }
    }
    Ok("50 instances tight, 5000 random partitioned ensembles bounded".into())
}

fn derived_scalars() -> Result<String, String> {
    let id = bit_identity();
    let c = id.space().clone();
    let res = r(1, 1024);

    let rep = r_uns(&id, &[coin(&c)]).map_err(|e| e.to_string())?;
    if rep.value != r(1, 1) || !rep.verify() {
        return Err(format!("robustness {} (expected 1)", rep.value));
    }
    // hand argument: r (b - a) = 1 with a, b in [0, 1] forces r >= 1
    let (lo, hi) = bisect(r(0, 1), r(2, 1), &res, |x| noisy_simulable(&id, &[coin(&c)], x));
    if !(lo < r(1, 1) && r(1, 1) <= hi) {
        return Err(format!("robustness oracle bracket [{lo}, {hi}] misses 1"));
    }

    let rep = q_succ(&id, &[coin(&c)]).map_err(|e| e.to_string())?;
    if !rep.value.is_zero() || !rep.verify() {
        return Err(format!("success probability {} (expected 0)", rep.value));
    }
    let triv = unit_evm(c.clone(), "u");
    let sim_at = |m: &Evm, sims: &[Evm], q: &Rational| is_simulable(&mix_direct_sum(q, m, &triv).unwrap(), sims).unwrap().is_simulable();
    if sim_at(&id, &[coin(&c)], &res) {
        return Err("oracle: identity simulable at q = 2^-10".into());
    }

    let rep = q_succ(&id, std::slice::from_ref(&id)).map_err(|e| e.to_string())?;
    if !rep.value.is_one() || !rep.verify() || !sim_at(&id, std::slice::from_ref(&id), &r(1, 1)) {
        return Err(format!("self success probability {} (expected 1)", rep.value));
    }

    // gbit: M_Z's post-processings have no x-component
    let (mx, mz) = gbit_axes();
    let rep = q_succ(&mx, std::slice::from_ref(&mz)).map_err(|e| e.to_string())?;
    let trivg = unit_evm(mx.space().clone(), "u");
    let oracle = (1..=1024).rev().find(|&k| {
        is_simulable(&mix_direct_sum(&r(k, 1024), &mx, &trivg).unwrap(), std::slice::from_ref(&mz)).unwrap().is_simulable()
    });
    let oracle_q = oracle.map_or(Rational::zero(), |k| r(k, 1024));
    if !rep.verify() || (&rep.value - &oracle_q).abs() > res {
        return Err(format!("gbit success probability {} vs grid oracle {oracle_q}", rep.value));
    }
    Ok(format!("R = 1, q = 0, q = 1 exact; gbit axis success probability {}", rep.value))
}

fn separation_dichotomy() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let pool = small_pool();
    let (mut below, mut not_below) = (0, 0);
    for i in 0..50 {
        let s = sample_space(&mut rng, &pool);
        let b = evm_upto(&mut rng, &s, 3);
        let a = if i % 2 == 0 {
            let rows = index_labels(rng.gen_range(1..=3));
            post_process(&b, &random_stochastic_matrix(&mut rng, &rows, b.labels())).unwrap()
        } else {
            evm_upto(&mut rng, &s, 3)
        };
        let v = test_post_processing(&a, &b).map_err(|e| e.to_string())?;
        match &v {
            OrderVerdict::Below { witness } => {
                let ok = post_process(&b, witness).map(|p| p == a).unwrap_or(false);
                if !ok {
                    return Err(format!("#{i}: witness does not reproduce A"));
                }
                below += 1;
            }
            OrderVerdict::NotBelow { separator, gain_a, gain_b } => {
                let ga = gain_value(separator.family(), &a).unwrap();
                let gb = gain_value(separator.family(), &b).unwrap();
                if ga != *gain_a || gb != *gain_b || ga <= gb {
                    return Err(format!("#{i}: separator not strict"));
                }
                if i % 2 == 0 {
                    return Err(format!("#{i}: constructed garbling reported NotBelow"));
                }
                not_below += 1;
            }
        }
    }
    Ok(format!("{below} Below, {not_below} NotBelow"))
}

fn non_totality() -> Result<String, String> {
    let (mx, mz) = gbit_axes();
    for (a, b, name) in [(&mx, &mz, "X vs Z"), (&mz, &mx, "Z vs X")] {
        let v = test_post_processing(a, b).map_err(|e| e.to_string())?;
        if v.is_below() || !v.verify(a, b) {
            return Err(format!("{name}: expected a verified NotBelow"));
        }
    }
    Ok("NotBelow both ways".into())
}

fn compatibility_collapse() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    for i in 0..25 {
        let s = space(SpaceKind::Classical(rng.gen_range(2..=4)));
        let k = rng.gen_range(1..=3);
        let family: Vec<Evm> = (0..k).map(|_| evm_upto(&mut rng, &s, 3)).collect();
        match is_compatible(&family).map_err(|e| e.to_string())? {
            CompatVerdict::Compatible(j) if j.verify(&family) => {}
            _ => return Err(format!("classical family #{i} not verified compatible")),
        }
        let rep = r_inc(&family).map_err(|e| e.to_string())?;
        if !rep.value.is_zero() {
            return Err(format!("classical family #{i}: robustness {}", rep.value));
        }
    }
    let (mx, mz) = gbit_axes();
    let fam = [mx, mz];
    let rep = r_inc(&fam).map_err(|e| e.to_string())?;
    let res = r(1, 4096);
    let (lo, hi) = bisect(r(1, 1), r(2, 1), &res, |s| joint_with_mass(&fam, s));
    let rstar = &rep.value + Rational::one();
    if !rep.value.is_positive() || !rep.verify() || !(lo < rstar && rstar <= hi) {
        return Err(format!("gbit robustness {} outside oracle bracket [{}, {}]", rep.value, lo - Rational::one(), hi - Rational::one()));
    }
    Ok(format!("25 classical families compatible; gbit robustness {} within 2^-12 oracle", rep.value))
}

fn coarse_graining_monotone() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_000a);
    let pool = small_pool();
    for i in 0..25 {
        let s = sample_space(&mut rng, &pool);
        let m = evm_upto(&mut rng, &s, 4);
        let part = random_partition(&mut rng, m.labels());
        let cg = coarse_grain(&m, &part).unwrap();
        let e = { let n = rng.gen_range(1..=3); random_ensemble(&mut rng, &s, n) };
        if gain_value(e.family(), &cg).unwrap() > gain_value(e.family(), &m).unwrap() {
            return Err(format!("#{i}: coarse-graining increased the gain"));
        }
        let v = test_post_processing(&cg, &m).unwrap();
        if !v.is_below() || !v.verify(&cg, &m) {
            return Err(format!("#{i}: order witness missing"));
        }
    }
    Ok("25 triples".into())
}

fn minimal_sufficiency() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_000b);
    let pool = small_pool();
    let mut reduced = 0;
    for i in 0..50 {
        let s = sample_space(&mut rng, &pool);
        let base = evm_upto(&mut rng, &s, 3);
        // split outcomes and pad with zero effects to force redundancy
        let rows = index_labels(base.len() + rng.gen_range(0..=2));
        let split = random_stochastic_matrix(&mut rng, &rows, base.labels());
        let m = if i % 3 == 0 { base } else { post_process(&base, &split).unwrap() };
        let r1 = minimal_sufficient(&m);
        if !pairwise_independent(r1.effects()) {
            return Err(format!("#{i}: output has proportional or zero effects"));
        }
        if minimal_sufficient(&r1) != r1 {
            return Err(format!("#{i}: not idempotent"));
        }
        let eq = test_equivalence(&m, &r1).unwrap();
        if !eq.is_equivalent() || !eq.verify(&m, &r1) {
            return Err(format!("#{i}: not order-equivalent"));
        }
        reduced += (r1.len() < m.len()) as usize;
    }
    Ok(format!("50 measurements, {reduced} strictly reduced"))
}

fn binary_experiment(a: &Rational, b: &Rational) -> StatExperiment {
    StatExperiment::new(
        vec!["t0".into(), "t1".into()],
        vec!["s0".into(), "s1".into()],
        vec![vec![a.clone(), Rational::one() - a], vec![b.clone(), Rational::one() - b]],
    )
    .unwrap()
}

/// `e1 = e2 G` with `G = e2^{-1} e1`; a garbling iff `G` has entries in [0, 1].
fn garbling_oracle(e1: &StatExperiment, e2: &StatExperiment) -> bool {
    let (p, q) = (&e2.kernel()[0], &e2.kernel()[1]);
    let det = &p[0] * &q[1] - &p[1] * &q[0];
    if det.is_zero() {
        return e1.kernel()[0] == e1.kernel()[1];
    }
    let inv = [[&q[1] / &det, -&p[1] / &det], [-&q[0] / &det, &p[0] / &det]];
    let k = e1.kernel();
    (0..2).all(|i| {
        (0..2).all(|j| {
            let g = &inv[i][0] * &k[0][j] + &inv[i][1] * &k[1][j];
            !g.is_negative() && g <= Rational::one()
        })
    })
}

fn blackwell_grid() -> Result<String, String> {
    let exps: Vec<StatExperiment> = (0..10)
        .map(|i| binary_experiment(&r(2 * i + 1, 20), &r((7 * i + 3) % 10 * 2 + 1, 20)))
        .collect();
    let mut below = 0;
    for (i, e1) in exps.iter().enumerate() {
        for (j, e2) in exps.iter().enumerate() {
            let v = blackwell_compare(e1, e2).map_err(|e| e.to_string())?;
            if v.is_below() != garbling_oracle(e1, e2) {
                return Err(format!("pair ({i}, {j}) disagrees with the 2x2 oracle"));
            }
            below += v.is_below() as usize;
        }
    }
    Ok(format!("100 pairs agree, {below} garblings"))
}

// ---------------------------------------------------------------------------

type Check = fn() -> Result<String, String>;

fn main() {
    let checks: [(&str, Check, u64); 12] = [
        ("closed-form gain on the classical bit", closed_form_gain_grid, 1),
        ("gain witness matrix has rank 5", witness_matrix_rank, 1),
        ("robustness LPs: primal value equals dual value", strong_duality, 60),
        ("unsimulability dual ensemble is tight", unsimulability_tightness, 60),
        ("incompatibility dual partitioned ensemble is tight", incompatibility_tightness, 60),
        ("derived robustness and success values", derived_scalars, 5),
        ("post-processing dichotomy on random pairs", separation_dichotomy, 30),
        ("gbit axis measurements are incomparable", non_totality, 1),
        ("classical families are compatible; gbit robustness", compatibility_collapse, 60),
        ("coarse-graining lowers the gain", coarse_graining_monotone, 10),
        ("minimal sufficient representatives", minimal_sufficiency, 30),
        ("binary experiments match the garbling oracle", blackwell_grid, 10),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; exceeded {budget} s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("[{:02}] {status} {name} ({:.2} s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
