use std::sync::Arc;

use gptm_core::evm::{is_extremal, minimal_sufficient, Evm};
use gptm_core::experiments::blackwell_compare;
use gptm_core::gain::{gain, gain_set, gain_value, PartitionedEnsemble, WStarFamily};
use gptm_core::incompatibility::{is_compatible_bounded, p_g_comp_bounded, p_g_comp_witness, r_inc_bounded, CompatVerdict, IncompReport};
use gptm_core::lp::verify_certificate;
use gptm_core::order::{test_equivalence, test_post_processing, OrderVerdict};
use gptm_core::random::{random_ensemble, random_partitioned_ensemble};
use gptm_core::simulability::{is_simulable, q_succ, r_uns, RobustnessKind, RobustnessReport, SimVerdict, SimWitness};
use gptm_core::{GptSpace, Rational};
use num_traits::{One, ToPrimitive};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cli::{Command, EvmCmd, ExperCmd, GainCmd, IncompCmd, OrderCmd, SimCmd, SpaceCmd};
use crate::config::{Format, Mode, RunConfig};
use crate::demos;
use crate::error::{CliError, EXIT_OK, EXIT_REFUTED};
use crate::model::*;

/// Random ensembles drawn per robustness spot check.
pub const SPOT_CHECKS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Json(Value),
    Csv(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub code: i32,
    pub body: Body,
}

impl Response {
    fn ok(v: Value) -> Self {
        Response { code: EXIT_OK, body: Body::Json(v) }
    }

    fn answer(yes: bool, v: Value) -> Self {
        Response { code: if yes { EXIT_OK } else { EXIT_REFUTED }, body: Body::Json(v) }
    }
}

fn ensure(ok: bool, what: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Internal(format!("{what} failed re-verification")))
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// Renders either the JSON payload or, for scalar results, a CSV table.
fn tabular(cfg: &RunConfig, v: Value, rows: impl FnOnce() -> String) -> Response {
    match cfg.format_or(Format::Json) {
        Format::Json => Response::ok(v),
        Format::Csv => Response { code: EXIT_OK, body: Body::Csv(rows()) },
    }
}

pub fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Response, CliError> {
    if cfg.mode == Mode::Float && !cmd.allows_float() {
        return Err(CliError::Usage("float mode is only available for `gain eval` and `demo pgep-grid`".into()));
    }
    let csv_ok = matches!(
        cmd,
        Command::Gain(_)
            | Command::Sim(SimCmd::Qsucc { .. } | SimCmd::Runs { .. })
            | Command::Incomp(IncompCmd::Pgcomp { .. } | IncompCmd::Rinc { .. })
            | Command::Demo { .. }
    );
    if cfg.format == Some(Format::Csv) && !csv_ok {
        return Err(CliError::Usage("csv output is only available for scalar results".into()));
    }
    let mut loader = Loader::new();
    match cmd {
        Command::Space(SpaceCmd::Validate { space }) => {
            let s = loader.space(space)?;
            Ok(Response::ok(json!({
                "valid": true,
                "space": space_json(&s),
                "classical": s.is_classical(),
                "extreme_rays": s.extreme_rays(),
            })))
        }
        Command::Evm(EvmCmd::Validate { evm }) => {
            let m = loader.evm(evm)?;
            let reduced = minimal_sufficient(&m);
            Ok(Response::ok(json!({
                "valid": true,
                "evm": evm_json(&m),
                "minimal_sufficient": effects_json(reduced.iter()),
                "extremal": is_extremal(&m),
            })))
        }
        Command::Gain(GainCmd::Eval { family, evms }) => gain_eval(&mut loader, cfg, family, evms),
        Command::Order(OrderCmd::Test { a, b }) => {
            let (a, b) = (loader.evm(a)?, loader.evm(b)?);
            let v = test_post_processing(&a, &b)?;
            ensure(v.verify(&a, &b), "order verdict")?;
            let mut out = verdict_json(&v);
            out["verified"] = json!(true);
            Ok(Response::answer(v.is_below(), out))
        }
        Command::Order(OrderCmd::Equiv { a, b }) => {
            let (a, b) = (loader.evm(a)?, loader.evm(b)?);
            let e = test_equivalence(&a, &b)?;
            ensure(e.verify(&a, &b), "equivalence verdicts")?;
            Ok(Response::answer(
                e.is_equivalent(),
                json!({
                    "equivalent": e.is_equivalent(),
                    "forward": verdict_json(&e.forward),
                    "backward": verdict_json(&e.backward),
                    "verified": true,
                }),
            ))
        }
        Command::Sim(SimCmd::Test { target, simulators }) => {
            let m = loader.evm(target)?;
            let sims = loader.evms(simulators)?;
            let v = is_simulable(&m, &sims)?;
            ensure(v.verify(&m, &sims), "simulability verdict")?;
            let mut out = match &v {
                SimVerdict::Simulable(w) => json!({ "verdict": "simulable", "witness": sim_witness_json(w, &m, &sims) }),
                SimVerdict::NotSimulable { separator, gain_target, gain_simulators } => json!({
                    "verdict": "not_simulable",
                    "separator": family_json(separator.family()),
                    "gain_target": rational_json(gain_target),
                    "gain_simulators": rational_json(gain_simulators),
                }),
            };
            out["verified"] = json!(true);
            Ok(Response::answer(v.is_simulable(), out))
        }
        Command::Sim(SimCmd::Qsucc { target, simulators } | SimCmd::Runs { target, simulators }) => {
            let m = loader.evm(target)?;
            let sims = loader.evms(simulators)?;
            let rep = if matches!(cmd, Command::Sim(SimCmd::Runs { .. })) { r_uns(&m, &sims)? } else { q_succ(&m, &sims)? };
            let mut out = robustness_json(&rep)?;
            if rep.kind == RobustnessKind::Unsimulability {
                out["spot_check"] = spot_check_unsimulability(cfg, &rep)?;
            }
            let label = if rep.kind == RobustnessKind::Unsimulability { "unsimulability" } else { "success_probability" };
            let value = format_value(&rep.value);
            Ok(tabular(cfg, out, || csv("quantity,value", [format!("{label},{value}")])))
        }
        Command::Incomp(IncompCmd::Test { family }) => {
            let family = loader.evms(family)?;
            let v = is_compatible_bounded(&family, cfg.product_limit)?;
            ensure(v.verify(&family), "compatibility verdict")?;
            let out = match &v {
                CompatVerdict::Compatible(j) => json!({
                    "verdict": "compatible",
                    "joint": effects_json(j.evm().iter()),
                    "factors": j.factors(),
                    "verified": true,
                }),
                CompatVerdict::Incompatible { separator, gain, comp } => json!({
                    "verdict": "incompatible",
                    "separator": partitioned_json(separator),
                    "gain": rational_json(gain),
                    "comp": rational_json(comp),
                    "verified": true,
                }),
            };
            Ok(Response::answer(v.is_compatible(), out))
        }
        Command::Incomp(IncompCmd::Pgcomp { ensemble }) => {
            let pe = loader.partitioned(ensemble)?;
            let (value, joint) = p_g_comp_witness(&pe, cfg.product_limit)?;
            ensure(joint_attains(&pe, joint.evm(), &value), "joint measurement")?;
            let out = json!({
                "value": rational_json(&value),
                "joint": effects_json(joint.evm().iter()),
                "factors": joint.factors(),
                "verified": true,
            });
            let v = format_value(&value);
            Ok(tabular(cfg, out, || csv("quantity,value", [format!("p_g_comp,{v}")])))
        }
        Command::Incomp(IncompCmd::Rinc { family }) => {
            let family = loader.evms(family)?;
            let rep = r_inc_bounded(&family, cfg.product_limit)?;
            let mut out = incompatibility_json(&rep)?;
            out["spot_check"] = spot_check_incompatibility(cfg, &rep)?;
            let v = format_value(&rep.value);
            Ok(tabular(cfg, out, || csv("quantity,value", [format!("incompatibility,{v}")])))
        }
        Command::Exper(ExperCmd::Compare { e1, e2 }) => {
            let (e1, e2) = (loader.experiment(e1)?, loader.experiment(e2)?);
            let v = blackwell_compare(&e1, &e2)?;
            let mut out = verdict_json(&v);
            out["verified"] = json!(true);
            out["garbling"] = json!(v.is_below());
            Ok(Response::answer(v.is_below(), out))
        }
        Command::Demo { name } => demos::run(*name, cfg),
    }
}

pub fn format_value(r: &Rational) -> String {
    gptm_core::rational::format_rational(r)
}

fn gain_eval(loader: &mut Loader, cfg: &RunConfig, family: &std::path::Path, evms: &[std::path::PathBuf]) -> Result<Response, CliError> {
    let ms = loader.evms(evms)?;
    let space: Arc<GptSpace> = ms[0].space().clone();
    let (fspace, fam) = loader.family(family, Some(&space))?;
    if *fspace != *space {
        return Err(gptm_core::Error::SpaceMismatch.into());
    }
    let names: Vec<String> = evms.iter().map(|p| p.display().to_string()).collect();
    if cfg.mode == Mode::Float {
        let values: Vec<f64> = ms.iter().map(|m| float_gain(&fam, m)).collect();
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let out = json!({
            "mode": "float",
            "value": best,
            "measurements": names.iter().zip(&values).map(|(n, v)| json!({ "file": n, "value": v })).collect::<Vec<_>>(),
        });
        return Ok(tabular(cfg, out, || {
            csv("measurement,value", names.iter().zip(&values).map(|(n, v)| format!("{n},{v}")).chain([format!("best,{best}")]))
        }));
    }
    let gains = ms.iter().map(|m| gain(&fam, m)).collect::<Result<Vec<_>, _>>()?;
    let best = gain_set(&fam, &ms)?;
    let out = json!({
        "value": rational_json(&best),
        "measurements": names.iter().zip(&gains).map(|(n, g)| json!({
            "file": n,
            "value": rational_json(&g.value),
            "rule": g.rule.iter().map(|(x, y)| (x.clone(), json!(y))).collect::<serde_json::Map<_, _>>(),
        })).collect::<Vec<_>>(),
    });
    Ok(tabular(cfg, out, || {
        csv(
            "measurement,value",
            names.iter().zip(&gains).map(|(n, g)| format!("{n},{}", format_value(&g.value))).chain([format!("best,{}", format_value(&best))]),
        )
    }))
}

/// `Σ_x max_y ⟨φ_y, M(x)⟩` in double precision.
pub fn float_gain(fam: &WStarFamily, m: &Evm) -> f64 {
    let f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN);
    m.effects()
        .iter()
        .map(|e| {
            fam.functionals()
                .iter()
                .map(|phi| phi.coords().iter().zip(e).map(|(a, b)| f(a) * f(b)).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum()
}

pub fn verdict_json(v: &OrderVerdict) -> Value {
    match v {
        OrderVerdict::Below { witness } => json!({ "verdict": "below", "witness": matrix_json(witness) }),
        OrderVerdict::NotBelow { separator, gain_a, gain_b } => json!({
            "verdict": "not_below",
            "separator": family_json(separator.family()),
            "gain_a": rational_json(gain_a),
            "gain_b": rational_json(gain_b),
        }),
    }
}

fn sim_witness_json(w: &SimWitness, m: &Evm, sims: &[Evm]) -> Value {
    json!({
        "weights": vector_json(&w.weights),
        "kernels": w.kernels.iter().zip(sims).map(|(k, n)| json!({
            "rows": m.labels(),
            "cols": n.labels(),
            "q": k.iter().map(|r| vector_json(r)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn robustness_json(rep: &RobustnessReport) -> Result<Value, CliError> {
    ensure(rep.verify(), "robustness report")?;
    ensure(verify_certificate(&rep.primal_problem, &rep.primal_outcome), "primal certificate")?;
    if let (Some(p), Some(o)) = (&rep.dual_problem, &rep.dual_outcome) {
        ensure(verify_certificate(p, o), "dual certificate")?;
    }
    let gains = rep.dual_gains().map(|(a, b)| json!([rational_json(&a), rational_json(&b)]));
    Ok(json!({
        "quantity": match rep.kind {
            RobustnessKind::Unsimulability => "unsimulability",
            RobustnessKind::SuccessProbability => "success_probability",
        },
        "value": rational_json(&rep.value),
        "primal": {
            "value": rational_json(rep.primal_value()),
            "witness": sim_witness_json(&rep.witness, &rep.simulated, &rep.simulators),
            "simulated": effects_json(rep.simulated.iter()),
            "noise": rep.noise.as_ref().map(|n| effects_json(n.iter())),
        },
        "dual_ensemble": rep.dual_ensemble.as_ref().map(|e| family_json(e.family())),
        "dual_value": rep.dual_value().map(rational_json),
        "dual_gains": gains,
        "verified": true,
    }))
}

pub fn incompatibility_json(rep: &IncompReport) -> Result<Value, CliError> {
    ensure(rep.verify(), "incompatibility report")?;
    ensure(verify_certificate(&rep.primal_problem, &rep.primal_outcome), "primal certificate")?;
    ensure(verify_certificate(&rep.dual_problem, &rep.dual_outcome), "dual certificate")?;
    let (g, c) = rep.dual_gains()?;
    Ok(json!({
        "quantity": "incompatibility",
        "value": rational_json(&rep.value),
        "primal": {
            "value": rational_json(rep.primal_value()),
            "joint": effects_json(rep.joint_labels.iter().zip(&rep.joint)),
            "noise": rep.noise.as_ref().map(|ns| ns.iter().map(|n| effects_json(n.iter())).collect::<Vec<_>>()),
        },
        "dual_ensemble": partitioned_json(&rep.dual_ensemble),
        "dual_value": rep.dual_value().map(rational_json),
        "dual_gains": [rational_json(&g), rational_json(&c)],
        "verified": true,
    }))
}

/// `Σ_x Σ_y ⟨φ_{x,y}, margin_x(y)⟩ = value` for the joint measurement.
fn joint_attains(pe: &PartitionedEnsemble, joint: &Evm, value: &Rational) -> bool {
    let Ok(checked) = Evm::new(joint.space().clone(), joint.iter().map(|(l, e)| (l.clone(), e.clone())).collect()) else {
        return false;
    };
    let sizes: Vec<usize> = pe.parts().iter().map(WStarFamily::len).collect();
    let mut total = Rational::from_integer(0.into());
    for (z, e) in checked.effects().iter().enumerate() {
        let mut rest = z;
        for (x, part) in pe.parts().iter().enumerate().rev() {
            let y = rest % sizes[x];
            rest /= sizes[x];
            total += part.functionals()[y].pair(e);
        }
    }
    total == *value
}

/// Random ensembles must obey `gain(E; M) <= (1 + R) gain_set(E; L)`.
fn spot_check_unsimulability(cfg: &RunConfig, rep: &RobustnessReport) -> Result<Value, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = &rep.value + Rational::one();
    let space = rep.target.space();
    for i in 0..SPOT_CHECKS {
        let e = random_ensemble(&mut rng, space, 1 + i % 3);
        let gm = gain_value(e.family(), &rep.target)?;
        let gl = gain_set(e.family(), &rep.simulators)?;
        ensure(gm <= &scale * gl, "unsimulability bound on a random ensemble")?;
    }
    Ok(json!({ "seed": cfg.seed, "samples": SPOT_CHECKS, "passed": true }))
}

/// Random partitioned ensembles must obey
/// `gain_partitioned <= (1 + R) p_g_comp`.
pub fn spot_check_incompatibility(cfg: &RunConfig, rep: &IncompReport) -> Result<Value, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = &rep.value + Rational::one();
    let space = rep.family[0].space();
    let sizes: Vec<usize> = rep.family.iter().map(Evm::len).collect();
    for _ in 0..SPOT_CHECKS {
        let pe = random_partitioned_ensemble(&mut rng, space, &sizes);
        let g = gptm_core::gain::gain_partitioned(&pe, &rep.family)?;
        let c = p_g_comp_bounded(&pe, cfg.product_limit)?;
        ensure(g <= &scale * c, "incompatibility bound on a random partitioned ensemble")?;
    }
    Ok(json!({ "seed": cfg.seed, "samples": SPOT_CHECKS, "passed": true }))
}
