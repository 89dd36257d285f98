//! Built-in scenarios, runnable without model files.

use std::sync::Arc;

use gptm_core::evm::Evm;
use gptm_core::gain::{gain_value, Functional, WStarFamily};
use gptm_core::incompatibility::r_inc_bounded;
use gptm_core::order::test_post_processing;
use gptm_core::rational::rat;
use gptm_core::space::{standard_space, SpaceKind};
use gptm_core::Rational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::cli::DemoName;
use crate::commands::{float_gain, format_value, incompatibility_json, spot_check_incompatibility, verdict_json, Body, Response};
use crate::config::{Format, Mode, RunConfig};
use crate::error::{CliError, EXIT_OK};

/// `M_q = {(1-q, 0), (q, 1)}` on the classical bit.
pub fn binary_measurement(q: &Rational) -> Evm {
    let c = Arc::new(standard_space(SpaceKind::Classical(2)).expect("standard space"));
    Evm::new(
        c,
        vec![("1".into(), vec![Rational::one() - q, Rational::zero()]), ("2".into(), vec![q.clone(), Rational::one()])],
    )
    .expect("valid for q in [0, 1]")
}

/// `(0, (-p, 1-p))`, with gain `max(0, 1 - (q+1) p)` against `M_q`.
pub fn guessing_family(p: &Rational) -> WStarFamily {
    WStarFamily::new(
        vec!["1".into(), "2".into()],
        vec![Functional::new(vec![Rational::zero(), Rational::zero()]), Functional::new(vec![-p.clone(), Rational::one() - p])],
    )
    .expect("distinct labels")
}

/// The two axis measurements of the gbit.
pub fn gbit_axes() -> (Evm, Evm) {
    let g = Arc::new(standard_space(SpaceKind::Gbit).expect("standard space"));
    let (h, z) = (rat(1, 2), Rational::zero());
    let mx = Evm::new(
        g.clone(),
        vec![("+".into(), vec![h.clone(), h.clone(), z.clone()]), ("-".into(), vec![h.clone(), -h.clone(), z.clone()])],
    )
    .expect("valid");
    let mz = Evm::new(g, vec![("+".into(), vec![h.clone(), z.clone(), h.clone()]), ("-".into(), vec![h.clone(), z, -h])]).expect("valid");
    (mx, mz)
}

pub fn grid_points() -> Vec<(Rational, Rational)> {
    (0..=8).flat_map(|i| (1..=3).map(move |j| (rat(i, 8), rat(j, 4)))).collect()
}

pub fn run(name: DemoName, cfg: &RunConfig) -> Result<Response, CliError> {
    match name {
        DemoName::PgepGrid => pgep_grid(cfg),
        DemoName::GbitIncomparable => {
            let (mx, mz) = gbit_axes();
            let xz = test_post_processing(&mx, &mz)?;
            let zx = test_post_processing(&mz, &mx)?;
            if !xz.verify(&mx, &mz) || !zx.verify(&mz, &mx) {
                return Err(CliError::Internal("gbit verdicts failed re-verification".into()));
            }
            let out = json!({
                "x_below_z": verdict_json(&xz),
                "z_below_x": verdict_json(&zx),
                "incomparable": !xz.is_below() && !zx.is_below(),
                "verified": true,
            });
            json_only(cfg, out)
        }
        DemoName::GbitRinc => {
            let (mx, mz) = gbit_axes();
            let rep = r_inc_bounded(&[mx, mz], cfg.product_limit)?;
            let mut out = incompatibility_json(&rep)?;
            out["spot_check"] = spot_check_incompatibility(cfg, &rep)?;
            json_only(cfg, out)
        }
    }
}

fn json_only(cfg: &RunConfig, v: Value) -> Result<Response, CliError> {
    match cfg.format_or(Format::Json) {
        Format::Json => Ok(Response { code: EXIT_OK, body: Body::Json(v) }),
        Format::Csv => Err(CliError::Usage("this demo has no csv rendering".into())),
    }
}

fn pgep_grid(cfg: &RunConfig) -> Result<Response, CliError> {
    let float = cfg.mode == Mode::Float;
    let rows: Vec<(String, String, String)> = grid_points()
        .iter()
        .map(|(p, q)| {
            let (fam, m) = (guessing_family(p), binary_measurement(q));
            if float {
                let f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN).to_string();
                Ok((f(p), f(q), float_gain(&fam, &m).to_string()))
            } else {
                Ok((format_value(p), format_value(q), format_value(&gain_value(&fam, &m)?)))
            }
        })
        .collect::<Result<_, CliError>>()?;
    let body = match cfg.format_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("p,q,P_g\n");
            for (p, q, g) in &rows {
                s.push_str(&format!("{p},{q},{g}\n"));
            }
            Body::Csv(s)
        }
        Format::Json => Body::Json(json!({
            "rows": rows.iter().map(|(p, q, g)| json!({ "p": p, "q": q, "P_g": g })).collect::<Vec<_>>(),
        })),
    };
    Ok(Response { code: EXIT_OK, body })
}
