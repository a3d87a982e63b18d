use pendctl::sim::max_stable_period;
use pendctl::{
    check, equilibria, evaluate, feedforward_gain, linearize, map_poles_s_to_z, place, simulate,
    sweep_sampling, zoh_discretize, Controller, GainSpec, LinearSystem, OperatingPoint, Plant,
    SimConfig, SweepSetup, TimeDomain, Trajectory,
};
use serde_json::json;

use crate::config::{PlantKind, RunConfig};
use crate::error::{CliError, Stage};
use crate::output::{to_value, Summary};

/// What a subcommand produced. `failure` is reported after the summary is written.
pub struct Outcome {
    pub summary: Summary,
    pub trajectory: Option<Trajectory>,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(summary: Summary) -> Self {
        Self {
            summary,
            trajectory: None,
            failure: None,
        }
    }
}

/// Linearized model, or the explicit override from the configuration.
fn design_model(cfg: &RunConfig) -> Result<LinearSystem, CliError> {
    match &cfg.system {
        Some(sys) if sys.domain() != TimeDomain::Continuous => Err(CliError::config(
            "build model",
            "system override must be continuous",
        )),
        Some(sys) => Ok(sys.clone()),
        None => linearize(&cfg.params, OperatingPoint::AngleZero).stage("linearize"),
    }
}

fn require_period(cfg: &RunConfig, stage: &'static str) -> Result<f64, CliError> {
    cfg.period
        .ok_or_else(|| CliError::config(stage, "a sampling period is required (--T)"))
}

fn gain_value(spec: &GainSpec, feedforward: Option<f64>) -> serde_json::Value {
    let mut v = to_value(spec);
    v["feedforward"] = to_value(&feedforward);
    v
}

pub fn linearize_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = design_model(cfg)?;
    let eq = equilibria(&cfg.params).stage("equilibria")?;
    let mut s = Summary::new(cfg.clone());
    s.system = json!({
        "model": sys,
        "open_loop_poles": sys.poles().stage("open-loop poles")?,
        "equilibria": eq,
    });
    Ok(Outcome::ok(s))
}

pub fn check_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = design_model(cfg)?;
    let (ctrb, obsv) = check(&sys, cfg.tol).stage("rank check")?;
    let mut s = Summary::new(cfg.clone());
    s.system = json!({ "model": sys });
    s.metrics = json!({
        "controllability": ctrb,
        "observability": obsv,
        "tol": cfg.tol,
    });
    let mut failed = Vec::new();
    if !ctrb.holds {
        failed.push(format!(
            "controllability rank {} < {}",
            ctrb.rank, ctrb.required
        ));
    }
    if !obsv.holds {
        failed.push(format!(
            "observability rank {} < {}",
            obsv.rank, obsv.required
        ));
    }
    let failure =
        (!failed.is_empty()).then(|| CliError::verification("rank check", failed.join("; ")));
    Ok(Outcome {
        summary: s,
        trajectory: None,
        failure,
    })
}

pub fn place_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = design_model(cfg)?;
    let spec = place(&sys, &cfg.poles()).stage("place")?;
    let psi = feedforward_gain(&sys, &spec.gain, 0).ok();
    let mut s = Summary::new(cfg.clone());
    s.system = json!({ "model": sys });
    s.residuals.insert("placement", spec.residual);
    let mut gains = json!({ "continuous": gain_value(&spec, psi) });

    if let Some(t) = cfg.period {
        let d = zoh_discretize(&sys, t).stage("discretize")?;
        let z = map_poles_s_to_z(&cfg.poles(), t);
        let spec_d = place(&d, &z).stage("discrete place")?;
        let psi_d = feedforward_gain(&d, &spec_d.gain, 0).ok();
        s.residuals.insert("discrete_placement", spec_d.residual);
        gains["discrete"] = gain_value(&spec_d, psi_d);
        s.system["discrete"] = to_value(&d);
    }
    s.gains = gains;
    Ok(Outcome::ok(s))
}

pub fn discretize_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t = require_period(cfg, "discretize")?;
    let sys = design_model(cfg)?;
    let d = zoh_discretize(&sys, t).stage("discretize")?;
    let (ctrb, _) = check(&d, cfg.tol).stage("rank check")?;
    let mut s = Summary::new(cfg.clone());
    s.system = json!({
        "model": sys,
        "discrete": d,
        "discrete_poles": d.poles().stage("discrete poles")?,
    });
    s.metrics = json!({ "controllability": ctrb });
    Ok(Outcome::ok(s))
}

pub fn simulate_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = design_model(cfg)?;
    let spec = place(&sys, &cfg.poles()).stage("place")?;
    let mut s = Summary::new(cfg.clone());
    s.residuals.insert("placement", spec.residual);

    // the reference only matters when it is non-zero
    let ff = |model: &LinearSystem, gain: &[f64]| -> Result<f64, CliError> {
        if cfg.reference == 0.0 {
            Ok(0.0)
        } else {
            feedforward_gain(model, gain, 0).stage("feedforward")
        }
    };

    let (controller, gains) = match cfg.period {
        None => {
            let psi = ff(&sys, &spec.gain)?;
            let c = Controller::Continuous {
                gain: spec.gain.clone(),
                feedforward: psi,
                reference: cfg.reference,
            };
            (c, json!({ "continuous": gain_value(&spec, Some(psi)) }))
        }
        Some(t) => {
            let d = zoh_discretize(&sys, t).stage("discretize")?;
            let (gain, used) = if cfg.redesign {
                let spec_d =
                    place(&d, &map_poles_s_to_z(&cfg.poles(), t)).stage("discrete place")?;
                s.residuals.insert("discrete_placement", spec_d.residual);
                (spec_d.gain.clone(), Some(spec_d))
            } else {
                (spec.gain.clone(), None)
            };
            let psi = ff(&d, &gain)?;
            s.system = json!({ "discrete": d });
            let mut g = json!({
                "continuous": gain_value(&spec, None),
                "applied": gain,
            });
            if let Some(spec_d) = used {
                g["discrete"] = gain_value(&spec_d, Some(psi));
            }
            g["feedforward"] = json!(psi);
            let c = Controller::Sampled {
                gain,
                feedforward: psi,
                reference: cfg.reference,
                period: t,
            };
            (c, g)
        }
    };
    s.gains = gains;

    let plant = match cfg.plant {
        PlantKind::Linear => Plant::Linear(sys.clone()),
        PlantKind::Nonlinear => Plant::Nonlinear(cfg.params),
    };
    let sim = SimConfig {
        t_final: cfg.t_final,
        step: cfg.step,
        divergence_bound: cfg.divergence_bound,
        ..SimConfig::new(plant, controller, cfg.initial.state())
    };
    let traj = simulate(&sim).stage("simulate")?;
    let metrics = evaluate(&traj).stage("metrics")?;

    s.system["model"] = to_value(&sys);
    let mut m = to_value(&metrics);
    m["samples"] = json!(traj.len());
    m["final_state"] = to_value(&traj.final_state());
    m["terminated_early"] = json!(traj.terminated_early);
    m["termination_reason"] = to_value(&traj.termination_reason);
    s.metrics = m;

    Ok(Outcome {
        summary: s,
        trajectory: Some(traj),
        failure: None,
    })
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let periods = cfg
        .periods
        .clone()
        .ok_or_else(|| CliError::config("sweep", "a period grid is required (--Ts)"))?;
    let sys = design_model(cfg)?;
    let spec = place(&sys, &cfg.poles()).stage("place")?;
    let plant = match cfg.plant {
        PlantKind::Linear => Plant::Linear(sys.clone()),
        PlantKind::Nonlinear => Plant::Nonlinear(cfg.params),
    };
    let setup = SweepSetup {
        t_final: cfg.t_final,
        step: cfg.step,
        divergence_bound: cfg.divergence_bound,
        ..SweepSetup::new(plant, sys.clone(), cfg.poles(), cfg.initial.state())
    };
    let table = sweep_sampling(&setup, &periods, cfg.redesign).stage("sweep")?;

    let mut s = Summary::new(cfg.clone());
    s.system = json!({ "model": sys });
    s.gains = json!({ "continuous": gain_value(&spec, None) });
    s.residuals.insert("placement", spec.residual);
    s.metrics = json!({
        "redesign": cfg.redesign,
        "max_stable_period": max_stable_period(&table),
        "table": table,
    });
    Ok(Outcome::ok(s))
}
