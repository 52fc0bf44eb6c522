//! Simulation campaigns that try to falsify the prescribed-time guarantee.
//!
//! Initial states are drawn on the boundary `V = R` and inside the level set,
//! each one is simulated against every disturbance profile of the campaign, and
//! a case passes when it settles before `Ts` and stays inside the level set up
//! to the one-step overshoot of the Euler discretization.

use std::fmt::Write as _;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::lyapunov;
use crate::sim::{level_set_monitor, settling_time, simulate, Plant};
use crate::tuning::{settling_estimate, validate_gains};
use crate::{
    DisturbanceProfile, Error, Gains, Result, Scalar, SettlingEstimate, Sign, SimConfig, State,
    TuningParameters,
};

/// Offset separating the interior sampler's seed from the boundary sampler's.
const INTERIOR_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

pub const MIN_BOUNDARY_COUNT: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec<T> {
    pub params: TuningParameters<T>,
    pub gains: Gains<T>,
    pub boundary_count: usize,
    pub interior_count: usize,
    pub profiles: Vec<DisturbanceProfile<T>>,
    pub sim: SimConfig<T>,
    pub rng_seed: u64,
}

impl<T: Scalar> CampaignSpec<T> {
    /// Campaign over the standard disturbance battery with default simulation
    /// settings for the deadline in `params`.
    pub fn standard(
        params: TuningParameters<T>,
        gains: Gains<T>,
        boundary_count: usize,
        rng_seed: u64,
    ) -> Self {
        Self {
            profiles: standard_battery(params.disturbance_bound),
            sim: SimConfig::for_deadline(params.settling_time),
            params,
            gains,
            boundary_count,
            interior_count: 0,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let report = validate_gains(&self.params, &self.gains);
        if !report.is_ok() {
            return Err(Error::InvalidGains(report.violations));
        }
        if self.boundary_count < MIN_BOUNDARY_COUNT {
            return Err(Error::InvalidCampaign(format!(
                "boundary_count must be >= {MIN_BOUNDARY_COUNT}, got {}",
                self.boundary_count
            )));
        }
        if self.profiles.is_empty() {
            return Err(Error::InvalidCampaign(
                "no disturbance profiles".to_string(),
            ));
        }
        let bound = self.params.disturbance_bound;
        for p in &self.profiles {
            if !p.is_finite() || p.amplitude() > bound {
                return Err(Error::InvalidCampaign(format!(
                    "profile {} exceeds the disturbance bound N = {bound}",
                    p.label()
                )));
            }
        }
        self.sim.validate(&self.gains, bound)
    }

    /// Allowed transient overshoot of `V` above `R`: `2 dt (mu1 + mu2 + N) sqrt(2R)`.
    pub fn chatter_tolerance(&self) -> T {
        let two = T::lit(2.0);
        two * self.sim.dt
            * (self.gains.authority() + self.params.disturbance_bound)
            * (two * self.params.level).sqrt()
    }
}

/// Zero, `+N` and `-N` constants, a `2 rad/s` sinusoid of amplitude `N`, and
/// `w = N sgn(x2)` (pushing against the velocity-braking term).
pub fn standard_battery<T: Scalar>(bound: T) -> Vec<DisturbanceProfile<T>> {
    vec![
        DisturbanceProfile::Zero,
        DisturbanceProfile::Constant {
            amplitude: bound,
            sign: Sign::Plus,
        },
        DisturbanceProfile::Constant {
            amplitude: bound,
            sign: Sign::Minus,
        },
        DisturbanceProfile::Sinusoid {
            amplitude: bound,
            frequency: T::lit(2.0),
        },
        DisturbanceProfile::AdversarialSign {
            amplitude: bound,
            sign: Sign::Minus,
        },
    ]
}

/// `count` states on `V = R`: the four axis extremes first, then seeded draws of
/// `x2` uniform on the open interval `(-sqrt(2R), sqrt(2R))` with
/// `x1 = ±(R - x2^2/2)/mu2`, the sign alternating `+, -, +, ...`.
pub fn sample_boundary<T: Scalar>(
    params: &TuningParameters<T>,
    gains: &Gains<T>,
    count: usize,
    seed: u64,
) -> Result<Vec<State<T>>> {
    if count < MIN_BOUNDARY_COUNT {
        return Err(Error::InvalidCampaign(format!(
            "boundary sample count must be >= {MIN_BOUNDARY_COUNT}, got {count}"
        )));
    }
    let report = validate_gains(params, gains);
    if !report.is_ok() {
        return Err(Error::InvalidGains(report.violations));
    }
    let level = params.level;
    let half = T::lit(0.5);
    let x1_max = level / gains.mu2;
    let x2_max = (T::lit(2.0) * level).sqrt();
    let zero = T::zero();

    let mut states = vec![
        State::new(x1_max, zero),
        State::new(-x1_max, zero),
        State::new(zero, x2_max),
        State::new(zero, -x2_max),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = x2_max.as_f64();
    for i in 0..count - MIN_BOUNDARY_COUNT {
        let x2 = loop {
            let draw: f64 = rng.gen_range(-span..span);
            if draw != -span {
                break T::lit(draw);
            }
        };
        let x1 = (level - half * x2 * x2) / gains.mu2;
        let x1 = if i % 2 == 0 { x1 } else { -x1 };
        states.push(State::new(x1, x2));
    }
    Ok(states)
}

/// Rejection sampling, uniform over the level set's bounding box
/// `[-R/mu2, R/mu2] x [-sqrt(2R), sqrt(2R)]`, keeping states with `V <= R`.
pub fn sample_interior<T: Scalar>(
    params: &TuningParameters<T>,
    gains: &Gains<T>,
    count: usize,
    seed: u64,
) -> Vec<State<T>> {
    let level = params.level;
    let x1_max = (level / gains.mu2).as_f64();
    let x2_max = (T::lit(2.0) * level).sqrt().as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(count);
    while states.len() < count {
        let s = State::new(
            T::lit(rng.gen_range(-x1_max..=x1_max)),
            T::lit(rng.gen_range(-x2_max..=x2_max)),
        );
        if lyapunov(&s, gains) <= level {
            states.push(s);
        }
    }
    states
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRecord<T> {
    pub case_id: usize,
    pub x0: State<T>,
    pub profile: String,
    pub settle_time: Option<T>,
    pub max_v_after_entry: Option<T>,
    pub pass: bool,
}

impl<T> CaseRecord<T> {
    pub fn settled(&self) -> bool {
        self.settle_time.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport<T> {
    pub cases: Vec<CaseRecord<T>>,
    pub estimate: SettlingEstimate<T>,
    pub settling_deadline: T,
    pub level: T,
    pub chatter_tolerance: T,
    /// Largest settling time among settled cases.
    pub worst_settle_time: Option<T>,
    /// Largest `max_v_after_entry - R` over all cases.
    pub worst_v_excursion: Option<T>,
    pub pass_count: usize,
}

pub const CAMPAIGN_CSV_HEADER: &str =
    "case_id,x1_0,x2_0,profile,settled,settle_time,max_v_after_entry,pass";

impl<T: Scalar> CampaignReport<T> {
    pub fn passed(&self) -> bool {
        self.pass_count == self.cases.len()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRecord<T>> {
        self.cases.iter().filter(|c| !c.pass)
    }

    /// Per-case rows; unsettled cases leave `settle_time` empty.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CAMPAIGN_CSV_HEADER.split(','))?;
        let opt = |v: Option<T>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cases {
            w.write_record([
                c.case_id.to_string(),
                c.x0.x1.to_string(),
                c.x0.x2.to_string(),
                c.profile.clone(),
                c.settled().to_string(),
                opt(c.settle_time),
                opt(c.max_v_after_entry),
                c.pass.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<T>| {
            v.map(|x| x.to_string())
                .unwrap_or_else(|| "n/a".to_string())
        };
        let e = &self.estimate;
        let _ = writeln!(out, "cases:               {}", self.cases.len());
        let _ = writeln!(out, "passed:              {}", self.pass_count);
        let _ = writeln!(out, "deadline Ts:         {}", self.settling_deadline);
        let _ = writeln!(out, "worst settle time:   {}", opt(self.worst_settle_time));
        let _ = writeln!(out, "worst V - R:         {}", opt(self.worst_v_excursion));
        let _ = writeln!(out, "V tolerance:         {}", self.chatter_tolerance);
        let _ = writeln!(
            out,
            "estimate:            r1={} r2={} eta={} t2={} t2_bound={}",
            e.r1, e.r2, e.eta, e.t2, e.t2_bound
        );
        for c in self.failures().take(10) {
            let _ = writeln!(
                out,
                "FAIL case {} x0=({}, {}) {} settle={} maxV={}",
                c.case_id,
                c.x0.x1,
                c.x0.x2,
                c.profile,
                opt(c.settle_time),
                opt(c.max_v_after_entry)
            );
        }
        let _ = writeln!(
            out,
            "result:              {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Samples `boundary_count` boundary and `interior_count` interior states and
/// runs every state against every profile on the double integrator.
pub fn run_campaign<T: Scalar>(spec: &CampaignSpec<T>) -> Result<CampaignReport<T>> {
    spec.validate()?;
    let mut states = sample_boundary(
        &spec.params,
        &spec.gains,
        spec.boundary_count,
        spec.rng_seed,
    )?;
    states.extend(sample_interior(
        &spec.params,
        &spec.gains,
        spec.interior_count,
        spec.rng_seed.wrapping_add(INTERIOR_SEED_OFFSET),
    ));
    run_cases(spec, &states)
}

/// Runs the given initial states (state-major, profile-minor case order).
/// Cases execute in parallel; the report is ordered by case id.
pub fn run_cases<T: Scalar>(
    spec: &CampaignSpec<T>,
    states: &[State<T>],
) -> Result<CampaignReport<T>> {
    spec.validate()?;
    let estimate = settling_estimate(&spec.params, &spec.gains)?;
    let level = spec.params.level;
    let deadline = spec.params.settling_time;
    let tolerance = spec.chatter_tolerance();
    let n_profiles = spec.profiles.len();

    let cases: Vec<CaseRecord<T>> = (0..states.len() * n_profiles)
        .into_par_iter()
        .map(|case_id| {
            let x0 = states[case_id / n_profiles];
            let profile = &spec.profiles[case_id % n_profiles];
            let traj = simulate(
                &Plant::DoubleIntegrator,
                &spec.gains,
                profile,
                x0,
                &spec.sim,
            )
            .map_err(|e| Error::Case {
                case_id,
                source: Box::new(e),
            })?;
            let settle_time = settling_time(&traj, spec.sim.settle_eps);
            let monitor = level_set_monitor(&traj, &spec.gains, level);
            let max_v_after_entry = monitor.map(|m| m.max_v_after_entry);
            let settled_in_time = settle_time.is_some_and(|t| t <= deadline);
            let invariant = max_v_after_entry.is_some_and(|v| v <= level + tolerance);
            Ok(CaseRecord {
                case_id,
                x0,
                profile: profile.label(),
                settle_time,
                max_v_after_entry,
                pass: settled_in_time && invariant,
            })
        })
        .collect::<Result<_>>()?;

    let worst_settle_time = cases
        .iter()
        .filter_map(|c| c.settle_time)
        .fold(None, |acc: Option<T>, t| Some(acc.map_or(t, |a| a.max(t))));
    let worst_v_excursion = cases
        .iter()
        .filter_map(|c| c.max_v_after_entry)
        .map(|v| v - level)
        .fold(None, |acc: Option<T>, d| Some(acc.map_or(d, |a| a.max(d))));
    let pass_count = cases.iter().filter(|c| c.pass).count();

    Ok(CampaignReport {
        cases,
        estimate,
        settling_deadline: deadline,
        level,
        chatter_tolerance: tolerance,
        worst_settle_time,
        worst_v_excursion,
        pass_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> TuningParameters<f64> {
        TuningParameters::new(2.0, 5.0, 0.5, 3.1, 0.2, 1.0)
    }

    fn gains() -> Gains<f64> {
        Gains::new(6.63, 33.24)
    }

    #[test]
    fn four_point_boundary() {
        let s = sample_boundary(&params(), &gains(), 4, 1).unwrap();
        let x1 = 2.0 / 33.24;
        assert_abs_diff_eq!(x1, 0.060_168_5, epsilon = 1e-7);
        assert_eq!(
            s,
            vec![
                State::new(x1, 0.0),
                State::new(-x1, 0.0),
                State::new(0.0, 2.0),
                State::new(0.0, -2.0)
            ]
        );
        assert_eq!(s[0], -s[1]);
        assert_eq!(s[2], -s[3]);
    }

    #[test]
    fn boundary_points_lie_on_level_set() {
        let g = gains();
        let s = sample_boundary(&params(), &g, 200, 42).unwrap();
        assert_eq!(s.len(), 200);
        let est = settling_estimate(&params(), &g).unwrap();
        for (i, st) in s.iter().enumerate() {
            assert!((lyapunov(st, &g) - 2.0).abs() <= 1e-12, "{st:?}");
            let n = st.norm();
            assert!(n >= est.r2 && n <= est.r1 * (1.0 + 1e-15), "{st:?}");
            if i >= 4 {
                assert!(st.x2.abs() < 2.0);
                let expected = if (i - 4) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(st.x1.signum(), expected);
            }
        }
    }

    #[test]
    fn boundary_sampler_preconditions() {
        assert!(matches!(
            sample_boundary(&params(), &gains(), 3, 0),
            Err(Error::InvalidCampaign(_))
        ));
        assert!(matches!(
            sample_boundary(&params(), &Gains::new(6.63, 6.63), 10, 0),
            Err(Error::InvalidGains(_))
        ));
    }

    #[test]
    fn interior_sampler() {
        let g = gains();
        assert!(sample_interior(&params(), &g, 0, 3).is_empty());
        let s = sample_interior(&params(), &g, 500, 3);
        assert_eq!(s.len(), 500);
        assert!(s.iter().all(|st| lyapunov(st, &g) <= 2.0));
        assert_eq!(s, sample_interior(&params(), &g, 500, 3));
        // reference initial conditions are inside the acceptance region
        assert!(lyapunov(&State::new(0.054152, 0.0), &g) <= 2.0);
        assert!(lyapunov(&State::new(0.0, 1.6), &g) <= 2.0);
    }

    #[test]
    fn battery_respects_bound() {
        let spec = CampaignSpec::standard(params(), gains(), 4, 0);
        assert_eq!(spec.profiles.len(), 5);
        assert!(spec.profiles.iter().all(|p| p.amplitude() <= 0.2));
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn oversized_profile_is_refused() {
        let mut spec = CampaignSpec::standard(params(), gains(), 4, 0);
        spec.profiles.push(DisturbanceProfile::Constant {
            amplitude: 0.4,
            sign: Sign::Plus,
        });
        assert!(matches!(
            run_campaign(&spec),
            Err(Error::InvalidCampaign(_))
        ));
    }

    #[test]
    fn invalid_gains_refuse_to_start() {
        let spec = CampaignSpec::standard(params(), Gains::new(6.63, 6.63), 4, 0);
        assert!(matches!(run_campaign(&spec), Err(Error::InvalidGains(_))));
    }

    #[test]
    fn origin_campaign_settles_immediately() {
        let spec = CampaignSpec {
            profiles: vec![DisturbanceProfile::Zero],
            sim: SimConfig::with_step(1e-5, 0.2),
            ..CampaignSpec::standard(params(), gains(), 4, 0)
        };
        let report = run_cases(&spec, &[State::origin()]).unwrap();
        assert!(report.passed());
        assert_eq!(report.cases[0].settle_time, Some(0.0));
    }

    #[test]
    fn small_campaign_is_deterministic_and_passes() {
        let spec = CampaignSpec {
            interior_count: 4,
            ..CampaignSpec::standard(params(), gains(), 6, 11)
        };
        let a = run_campaign(&spec).unwrap();
        let b = run_campaign(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cases.len(), 50);
        assert!(a.passed(), "{}", a.summary());
        assert!(a.cases.iter().enumerate().all(|(i, c)| c.case_id == i));

        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(CAMPAIGN_CSV_HEADER));
        assert_eq!(text.lines().count(), 51);
    }
}
