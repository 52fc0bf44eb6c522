//! Fixed-step forward Euler integration of the closed loop, trajectory
//! recording and post-hoc settling / level-set analysis.
//!
//! The right-hand side is discontinuous on the axes, so no higher-order scheme
//! is used. Control and disturbance are evaluated once per step at the pre-step
//! time and state.

use std::io;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    compensating_torque, double_integrator_rhs, lyapunov, pendulum_rhs, twisting_control,
};
use crate::{DisturbanceProfile, Error, Gains, PendulumParams, Result, Scalar, State};

pub const DEFAULT_DT: f64 = 1e-5;
pub const DEFAULT_SETTLE_EPS: f64 = 1e-2;
/// Upper bound on recorded samples when the stride is chosen automatically.
pub const MAX_RECORDED_SAMPLES: usize = 20_000;
/// Step counts beyond this are treated as configuration mistakes.
const MAX_STEPS: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub record_stride: usize,
    /// Euclidean-norm tolerance for the settling measurement.
    pub settle_eps: T,
}

impl<T: Scalar> SimConfig<T> {
    /// Defaults for a deadline `ts`: `dt = 1e-5`, horizon `2 ts`, `eps = 1e-2`,
    /// and a stride keeping at most [`MAX_RECORDED_SAMPLES`] samples.
    pub fn for_deadline(ts: T) -> Self {
        Self::with_step(T::lit(DEFAULT_DT), T::lit(2.0) * ts)
    }

    /// Automatic stride for the given step and horizon.
    pub fn with_step(dt: T, t_end: T) -> Self {
        Self {
            dt,
            t_end,
            record_stride: auto_stride(dt, t_end),
            settle_eps: T::lit(DEFAULT_SETTLE_EPS),
        }
    }

    /// Number of Euler steps covering the horizon.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }

    /// Checks the config on its own and against the control authority
    /// `mu1 + mu2 + w_max`: between two recorded samples the state must not be
    /// able to cross the settling band unseen.
    pub fn validate(&self, gains: &Gains<T>, max_disturbance: T) -> Result<()> {
        let zero = T::zero();
        let fail = |msg: String| Err(Error::InvalidSimConfig(msg));
        if !(self.dt.is_finite() && self.dt > zero) {
            return fail(format!("dt must be positive and finite, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > zero) {
            return fail(format!(
                "t_end must be positive and finite, got {}",
                self.t_end
            ));
        }
        if self.dt > self.t_end {
            return fail(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end));
        }
        if (self.t_end / self.dt).as_f64() > MAX_STEPS {
            return fail(format!(
                "t_end/dt = {} steps is too many",
                self.t_end / self.dt
            ));
        }
        if self.record_stride == 0 {
            return fail("record_stride must be >= 1".to_string());
        }
        if !(self.settle_eps.is_finite() && self.settle_eps > zero) {
            return fail(format!(
                "settle_eps must be positive and finite, got {}",
                self.settle_eps
            ));
        }
        let authority = gains.authority() + max_disturbance;
        let gap = T::from_usize(self.record_stride).unwrap_or(T::infinity()) * self.dt;
        if authority > zero && gap > self.settle_eps / authority {
            return fail(format!(
                "record_stride * dt = {gap} exceeds settle_eps / (mu1 + mu2 + w_max) = {}; \
                 the settling band could be crossed between samples",
                self.settle_eps / authority
            ));
        }
        Ok(())
    }
}

fn auto_stride<T: Scalar>(dt: T, t_end: T) -> usize {
    let steps = (t_end / dt).round().as_f64();
    if !(steps.is_finite() && steps > 0.0) {
        return 1;
    }
    // samples = floor(steps / stride) + 1, plus possibly the unaligned final step
    let stride = (steps / (MAX_RECORDED_SAMPLES - 2) as f64).ceil();
    stride.max(1.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plant<T> {
    DoubleIntegrator,
    /// Pendulum driven through the compensating torque. The disturbance profile
    /// is read as acceleration `w`; the torque-level disturbance is `w / b`.
    Pendulum(PendulumParams<T>),
}

impl<T> Plant<T> {
    pub fn kind(&self) -> PlantKind {
        match self {
            Plant::DoubleIntegrator => PlantKind::DoubleIntegrator,
            Plant::Pendulum(_) => PlantKind::Pendulum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    DoubleIntegrator,
    Pendulum,
}

/// One recorded row; field order and names are the CSV header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub t: T,
    pub x1: T,
    pub x2: T,
    pub u: T,
    pub omega: T,
    #[serde(rename = "V")]
    pub v: T,
}

impl<T: Scalar> Sample<T> {
    pub fn state(&self) -> State<T> {
        State::new(self.x1, self.x2)
    }
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,x1,x2,u,omega,V";

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub dt: T,
    pub t_end: T,
    pub plant: PlantKind,
}

impl<T: Scalar> Trajectory<T> {
    /// Writes `t,x1,x2,u,omega,V` rows with shortest round-trip float formatting.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for sample in &self.samples {
            w.serialize(sample)?;
        }
        if self.samples.is_empty() {
            w.write_record(TRAJECTORY_CSV_HEADER.split(','))?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn last(&self) -> Option<&Sample<T>> {
        self.samples.last()
    }
}

/// Parses rows written by [`Trajectory::write_csv`].
pub fn read_samples_csv<T: Scalar, R: io::Read>(reader: R) -> Result<Vec<Sample<T>>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != TRAJECTORY_CSV_HEADER {
        return Err(Error::Csv(format!(
            "expected header {TRAJECTORY_CSV_HEADER}, got {}",
            header.join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Integrates the closed loop from `x0` over `cfg.t_end`.
///
/// Sample `k` is taken at `t = k dt` before the `k`-th update; the final step
/// is always recorded. Identical inputs give bit-identical output.
pub fn simulate<T: Scalar>(
    plant: &Plant<T>,
    gains: &Gains<T>,
    profile: &DisturbanceProfile<T>,
    x0: State<T>,
    cfg: &SimConfig<T>,
) -> Result<Trajectory<T>> {
    if !(gains.mu1.is_finite() && gains.mu2.is_finite()) {
        return Err(Error::InvalidSimConfig("gains must be finite".to_string()));
    }
    if !profile.is_finite() {
        return Err(Error::InvalidSimConfig(
            "disturbance profile must be finite".to_string(),
        ));
    }
    if let Plant::Pendulum(pp) = plant {
        if !pp.is_physical() {
            return Err(Error::InvalidSimConfig(
                "pendulum needs m, l, J, g > 0 and fv >= 0".to_string(),
            ));
        }
    }
    cfg.validate(gains, profile.amplitude())?;
    if !x0.is_finite() {
        return Err(Error::NonFiniteState { step: 0 });
    }

    let steps = cfg.steps();
    let stride = cfg.record_stride;
    let mut samples = Vec::with_capacity(steps / stride + 2);
    let mut s = x0;
    for k in 0..=steps {
        let t = T::from_usize(k).unwrap_or(T::infinity()) * cfg.dt;
        let u = twisting_control(&s, gains);
        let omega = profile.evaluate(t, &s);
        if k % stride == 0 || k == steps {
            samples.push(Sample {
                t,
                x1: s.x1,
                x2: s.x2,
                u,
                omega,
                v: lyapunov(&s, gains),
            });
        }
        if k == steps {
            break;
        }
        let rate = match plant {
            Plant::DoubleIntegrator => double_integrator_rhs(&s, u, omega),
            Plant::Pendulum(pp) => {
                let tau = compensating_torque(&s, pp, u);
                pendulum_rhs(&s, pp, tau, omega / pp.b())
            }
        };
        s = s.advance(&rate, cfg.dt);
        if !s.is_finite() {
            return Err(Error::NonFiniteState { step: k + 1 });
        }
    }

    Ok(Trajectory {
        samples,
        dt: cfg.dt,
        t_end: cfg.t_end,
        plant: plant.kind(),
    })
}

/// Smallest recorded time after which every recorded sample has `|x| <= eps`,
/// or `None` if the final sample is outside the band.
pub fn settling_time<T: Scalar>(traj: &Trajectory<T>, eps: T) -> Option<T> {
    let mut settled_at = None;
    for sample in traj.samples.iter().rev() {
        if sample.state().norm() > eps {
            break;
        }
        settled_at = Some(sample.t);
    }
    settled_at
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetReport<T> {
    pub first_entry_time: T,
    /// Largest `V` from the first entry on (entry sample included).
    pub max_v_after_entry: T,
    /// Samples after the first entry with `V > level`.
    pub excursions: usize,
}

/// Tracks `V` (recomputed from the states with `gains`) against `level`.
/// `None` means the trajectory never entered the level set.
pub fn level_set_monitor<T: Scalar>(
    traj: &Trajectory<T>,
    gains: &Gains<T>,
    level: T,
) -> Option<LevelSetReport<T>> {
    let values = traj
        .samples
        .iter()
        .map(|s| (s.t, lyapunov(&s.state(), gains)));
    let mut report: Option<LevelSetReport<T>> = None;
    for (t, v) in values {
        match report.as_mut() {
            None if v <= level => {
                report = Some(LevelSetReport {
                    first_entry_time: t,
                    max_v_after_entry: v,
                    excursions: 0,
                })
            }
            None => {}
            Some(r) => {
                r.max_v_after_entry = r.max_v_after_entry.max(v);
                if v > level {
                    r.excursions += 1;
                }
            }
        }
    }
    report
}
