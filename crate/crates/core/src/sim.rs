//! Closed-loop simulation of the cart/pendulum under state feedback.
//!
//! Plants are integrated with fixed-step classical RK4. A continuous
//! controller is part of the vector field (re-evaluated at every RK4
//! stage); a sampled controller holds `u` constant between sampling
//! instants `kT` and the plant is sub-stepped `T / h` times per sample.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::zoh_discretize;
use crate::error::{Error, Result};
use crate::kernel::char_poly;
use crate::model::{
    dynamics_unchecked, output, LinearSystem, PendulumParams, StateVector, TimeDomain,
};
use crate::placement::{closed_loop_matrix, map_poles_s_to_z, place};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_T_FINAL: f64 = 10.0;
pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e3;
/// Settling band as a fraction of the initial `||x||_inf`.
pub const SETTLING_FRACTION: f64 = 0.02;

const PERIOD_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum Plant {
    Nonlinear(PendulumParams),
    /// Continuous 4-state, single-input, 2-output linear model.
    Linear(LinearSystem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Controller {
    /// `u = -K x + Psi delta`, evaluated continuously.
    Continuous {
        gain: Vec<f64>,
        feedforward: f64,
        reference: f64,
    },
    /// `u_k = -K x(kT) + Psi delta`, held over `[kT, (k+1)T)`.
    Sampled {
        gain: Vec<f64>,
        feedforward: f64,
        reference: f64,
        period: f64,
    },
}

impl Controller {
    pub fn continuous(gain: Vec<f64>) -> Self {
        Controller::Continuous {
            gain,
            feedforward: 0.0,
            reference: 0.0,
        }
    }

    pub fn sampled(gain: Vec<f64>, period: f64) -> Self {
        Controller::Sampled {
            gain,
            feedforward: 0.0,
            reference: 0.0,
            period,
        }
    }

    fn law(&self) -> ([f64; 4], f64) {
        let (gain, feedforward, reference) = match self {
            Controller::Continuous {
                gain,
                feedforward,
                reference,
            }
            | Controller::Sampled {
                gain,
                feedforward,
                reference,
                ..
            } => (gain, *feedforward, *reference),
        };
        let mut k = [0.0; 4];
        k.copy_from_slice(gain);
        (k, feedforward * reference)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub plant: Plant,
    pub controller: Controller,
    pub x0: StateVector,
    pub t_final: f64,
    /// Integrator step `h`.
    pub step: f64,
    /// Runs stop once `||x||_inf` exceeds this.
    pub divergence_bound: f64,
}

impl SimConfig {
    pub fn new(plant: Plant, controller: Controller, x0: StateVector) -> Self {
        Self {
            plant,
            controller,
            x0,
            t_final: DEFAULT_T_FINAL,
            step: DEFAULT_STEP,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!(
                "integrator step must be positive, got {}",
                self.step
            ));
        }
        if !(self.t_final.is_finite() && self.step <= self.t_final) {
            return bad(format!(
                "need 0 < h <= t_final, got h = {}, t_final = {}",
                self.step, self.t_final
            ));
        }
        if self.divergence_bound.is_nan() || self.divergence_bound <= 0.0 {
            return bad(format!(
                "divergence bound must be positive, got {}",
                self.divergence_bound
            ));
        }
        if !self.x0.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }
        match &self.plant {
            Plant::Nonlinear(p) => p.validate()?,
            Plant::Linear(sys) => {
                if sys.order() != 4 || sys.inputs() != 1 || sys.outputs() != 2 {
                    return bad("linear plant must have 4 states, 1 input and 2 outputs".into());
                }
                if sys.domain() != TimeDomain::Continuous {
                    return bad("linear plant must be continuous".into());
                }
            }
        }
        let (gain, extra) = match &self.controller {
            Controller::Continuous {
                gain,
                feedforward,
                reference,
            } => (gain, [*feedforward, *reference]),
            Controller::Sampled {
                gain,
                feedforward,
                reference,
                period,
            } => {
                self.substeps(*period)?;
                (gain, [*feedforward, *reference])
            }
        };
        if gain.len() != 4 {
            return bad(format!("gain must have 4 entries, got {}", gain.len()));
        }
        if gain.iter().chain(&extra).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("controller parameters"));
        }
        Ok(())
    }

    /// Integrator steps per sampling period; `period` must be a multiple of `h`.
    fn substeps(&self, period: f64) -> Result<usize> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidPeriod(period));
        }
        let n = (period / self.step).round();
        if n < 1.0 || (n * self.step - period).abs() > PERIOD_MATCH_TOL * period {
            return Err(Error::InvalidConfig(format!(
                "sampling period {period} is not an integer multiple of the step {}",
                self.step
            )));
        }
        Ok(n as usize)
    }

    fn steps(&self) -> usize {
        (self.t_final / self.step + 1e-9).floor() as usize
    }
}

/// Time-indexed record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Input applied from each time to the next.
    pub inputs: Vec<f64>,
    pub outputs: Vec<[f64; 2]>,
    pub terminated_early: bool,
    pub termination_reason: Option<String>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            inputs: Vec::with_capacity(n),
            outputs: Vec::with_capacity(n),
            terminated_early: false,
            termination_reason: None,
        }
    }

    fn push(&mut self, t: f64, x: StateVector, u: f64, y: [f64; 2]) {
        self.times.push(t);
        self.states.push(x);
        self.inputs.push(u);
        self.outputs.push(y);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&StateVector> {
        self.states.last()
    }
}

/// One classical RK4 step of an autonomous field; `None` if any stage is non-finite.
pub fn rk4_step<F>(field: F, x: &StateVector, h: f64) -> Option<StateVector>
where
    F: Fn(&StateVector) -> StateVector,
{
    let k1 = field(x);
    let k2 = field(&(*x + k1 * (0.5 * h)));
    let k3 = field(&(*x + k2 * (0.5 * h)));
    let k4 = field(&(*x + k3 * h));
    let next = *x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    [k1, k2, k3, k4, next]
        .iter()
        .all(StateVector::is_finite)
        .then_some(next)
}

/// RK4 step of `x' = f(x, u)` with `u` held across the step.
pub fn step_rk4<F>(f: F, x: &StateVector, u: f64, h: f64) -> Option<StateVector>
where
    F: Fn(&StateVector, f64) -> StateVector,
{
    rk4_step(|s| f(s, u), x, h)
}

enum Model {
    Nonlinear(PendulumParams),
    Linear {
        a: [[f64; 4]; 4],
        b: [f64; 4],
        c: [[f64; 4]; 2],
    },
}

impl Model {
    fn new(plant: &Plant) -> Self {
        match plant {
            Plant::Nonlinear(p) => Model::Nonlinear(*p),
            Plant::Linear(sys) => Model::Linear {
                a: std::array::from_fn(|i| std::array::from_fn(|j| sys.a()[(i, j)])),
                b: std::array::from_fn(|i| sys.b()[(i, 0)]),
                c: std::array::from_fn(|i| std::array::from_fn(|j| sys.c()[(i, j)])),
            },
        }
    }

    #[inline]
    fn derivative(&self, x: &StateVector, u: f64) -> StateVector {
        match self {
            Model::Nonlinear(p) => dynamics_unchecked(x, u, p),
            Model::Linear { a, b, .. } => {
                StateVector(std::array::from_fn(|i| dot(&a[i], &x.0) + b[i] * u))
            }
        }
    }

    fn output(&self, x: &StateVector) -> [f64; 2] {
        match self {
            Model::Nonlinear(_) => output(x),
            Model::Linear { c, .. } => [dot(&c[0], &x.0), dot(&c[1], &x.0)],
        }
    }
}

#[inline]
fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Runs whichever controller the configuration carries.
pub fn simulate(cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let model = Model::new(&cfg.plant);
    let (k, offset) = cfg.controller.law();
    let law = |x: &StateVector| -dot(&k, &x.0) + offset;
    let h = cfg.step;
    let steps = cfg.steps();
    let substeps = match cfg.controller {
        Controller::Continuous { .. } => None,
        Controller::Sampled { period, .. } => Some(cfg.substeps(period)?),
    };

    let mut traj = Trajectory::with_capacity(steps + 1);
    let mut x = cfg.x0;
    let mut held = law(&x);
    traj.push(0.0, x, held, model.output(&x));

    for i in 0..steps {
        let next = match substeps {
            None => rk4_step(|s| model.derivative(s, law(s)), &x, h),
            Some(_) => step_rk4(|s, u| model.derivative(s, u), &x, held, h),
        };
        let Some(next) = next else {
            traj.terminated_early = true;
            traj.termination_reason = Some(format!("non-finite state after t = {}", i as f64 * h));
            break;
        };
        x = next;
        let u = match substeps {
            None => law(&x),
            Some(n) => {
                if (i + 1) % n == 0 {
                    held = law(&x);
                }
                held
            }
        };
        traj.push((i + 1) as f64 * h, x, u, model.output(&x));
        if x.norm_inf() > cfg.divergence_bound {
            traj.terminated_early = true;
            traj.termination_reason = Some(format!(
                "state norm {:.3e} exceeded divergence bound {:.3e}",
                x.norm_inf(),
                cfg.divergence_bound
            ));
            break;
        }
    }
    Ok(traj)
}

pub fn simulate_continuous(cfg: &SimConfig) -> Result<Trajectory> {
    match cfg.controller {
        Controller::Continuous { .. } => simulate(cfg),
        Controller::Sampled { .. } => Err(Error::InvalidConfig(
            "expected a continuous controller".into(),
        )),
    }
}

pub fn simulate_sampled(cfg: &SimConfig) -> Result<Trajectory> {
    match cfg.controller {
        Controller::Sampled { .. } => simulate(cfg),
        Controller::Continuous { .. } => {
            Err(Error::InvalidConfig("expected a sampled controller".into()))
        }
    }
}

/// Scalar performance of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfMetrics {
    /// `max |y1|` (m).
    pub peak_y1: f64,
    /// Excursion of `|y1|` above its starting level, as a fraction of it.
    pub overshoot_y1: f64,
    /// First time after which `||x||_inf` stays inside the settling band;
    /// infinite (serialized as `null`) if it never does.
    #[serde(with = "finite_or_null")]
    pub settling_time: f64,
    pub stable: bool,
}

/// Peak, overshoot and settling time of a trajectory.
///
/// The settling band is `SETTLING_FRACTION * ||x(0)||_inf` and must hold
/// for the remainder of the run. Overshoot is measured against `|y1(0)|`,
/// or against `||x(0)||_inf` when the cart starts at the origin.
pub fn evaluate(traj: &Trajectory) -> Result<PerfMetrics> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let peak_y1 = traj.outputs.iter().fold(0.0f64, |m, y| m.max(y[0].abs()));

    let start = traj.outputs[0][0].abs();
    let level = if start > 0.0 {
        start
    } else {
        traj.states[0].norm_inf()
    };
    let overshoot_y1 = if level > 0.0 {
        ((peak_y1 - start) / level).max(0.0)
    } else {
        0.0
    };

    let settling_time = if traj.terminated_early {
        f64::INFINITY
    } else {
        let band = SETTLING_FRACTION * traj.states[0].norm_inf();
        match traj.states.iter().rposition(|x| x.norm_inf() > band) {
            None => traj.times[0],
            Some(last) if last + 1 < traj.len() => traj.times[last + 1],
            Some(_) => f64::INFINITY,
        }
    };

    Ok(PerfMetrics {
        peak_y1,
        overshoot_y1,
        settling_time,
        stable: !traj.terminated_early && settling_time.is_finite(),
    })
}

/// Everything a sampling-period sweep holds fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSetup {
    pub plant: Plant,
    /// Continuous model the gains are designed on.
    pub design: LinearSystem,
    pub poles: Vec<Complex64>,
    pub x0: StateVector,
    pub t_final: f64,
    pub step: f64,
    pub divergence_bound: f64,
}

impl SweepSetup {
    pub fn new(plant: Plant, design: LinearSystem, poles: Vec<Complex64>, x0: StateVector) -> Self {
        Self {
            plant,
            design,
            poles,
            x0,
            t_final: DEFAULT_T_FINAL,
            step: DEFAULT_STEP,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
        }
    }

    /// Sampled controller for `period`: `K_d` re-placed at `e^(sT)` when
    /// `redesign`, otherwise the continuous gain.
    pub fn sampled_gain(&self, period: f64, redesign: bool) -> Result<(LinearSystem, Vec<f64>)> {
        let discrete = zoh_discretize(&self.design, period)?;
        let gain = if redesign {
            place(&discrete, &map_poles_s_to_z(&self.poles, period))?.gain
        } else {
            place(&self.design, &self.poles)?.gain
        };
        Ok((discrete, gain))
    }

    pub fn sim_config(&self, controller: Controller) -> SimConfig {
        SimConfig {
            plant: self.plant.clone(),
            controller,
            x0: self.x0,
            t_final: self.t_final,
            step: self.step,
            divergence_bound: self.divergence_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub period: f64,
    pub gain: Vec<f64>,
    /// Spectral radius of `A_d - B_d K` on the linear design model.
    pub spectral_radius: f64,
    pub metrics: PerfMetrics,
}

/// Sampled-control performance for each period, in input order.
pub fn sweep_sampling(
    setup: &SweepSetup,
    periods: &[f64],
    redesign: bool,
) -> Result<Vec<SweepPoint>> {
    if periods.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep needs at least one sampling period".into(),
        ));
    }
    periods
        .par_iter()
        .map(|&period| {
            let (discrete, gain) = setup.sampled_gain(period, redesign)?;
            let spectral_radius = spectral_radius(&discrete, &gain)?;
            let traj =
                simulate_sampled(&setup.sim_config(Controller::sampled(gain.clone(), period)))?;
            Ok(SweepPoint {
                period,
                gain,
                spectral_radius,
                metrics: evaluate(&traj)?,
            })
        })
        .collect()
}

/// Largest period of the leading run of stable points, if the first is stable.
pub fn max_stable_period(points: &[SweepPoint]) -> Option<f64> {
    points
        .iter()
        .take_while(|p| p.metrics.stable)
        .last()
        .map(|p| p.period)
}

/// `max |z|` over the eigenvalues of `A - BK`.
pub fn spectral_radius(sys: &LinearSystem, gain: &[f64]) -> Result<f64> {
    let roots = char_poly(&closed_loop_matrix(sys, gain)?)?.roots();
    Ok(roots.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
