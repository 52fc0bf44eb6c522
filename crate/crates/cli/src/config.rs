//! Run configuration: a TOML file with `[params]`, `[gains]`, `[sim]`,
//! `[disturbance]`, `[campaign]`, `[pendulum]` and `[output]` sections, every
//! key of which can be overridden by the same-named command-line flag.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use twisting_core::tuning::{synthesize_gains, DEFAULT_MARGIN};
use twisting_core::verify::standard_battery;
use twisting_core::{
    DisturbanceProfileF64, GainsF64, PendulumParamsF64, Plant, Sign, SimConfigF64, StateF64,
    TuningParametersF64,
};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub gains: GainsSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub disturbance: DisturbanceSection,
    #[serde(default)]
    pub campaign: CampaignSection,
    #[serde(default)]
    pub pendulum: PendulumSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(rename = "R")]
    pub level: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
    #[serde(rename = "N")]
    pub disturbance_bound: Option<f64>,
    #[serde(rename = "Ts")]
    pub settling_time: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    /// Synthesis margin when the gains are not given.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PlantChoice {
    DoubleIntegrator,
    Pendulum,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub record_stride: Option<usize>,
    pub settle_eps: Option<f64>,
    pub plant: Option<PlantChoice>,
    pub x1_0: Option<f64>,
    pub x2_0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Zero,
    Constant,
    Sinusoid,
    AdversarialSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SignChoice {
    Plus,
    Minus,
}

impl From<SignChoice> for Sign {
    fn from(s: SignChoice) -> Self {
        match s {
            SignChoice::Plus => Sign::Plus,
            SignChoice::Minus => Sign::Minus,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    pub kind: Option<ProfileKind>,
    /// Defaults to `N`.
    pub amplitude: Option<f64>,
    /// Sinusoid only, rad/s; defaults to 2.
    pub frequency: Option<f64>,
    /// Defaults to `plus` for constants and `minus` (against the braking term)
    /// for the adversarial profile.
    pub sign: Option<SignChoice>,
}

impl DisturbanceSection {
    fn resolve(&self, bound: f64) -> Result<DisturbanceProfileF64, CliError> {
        let amplitude = self.amplitude.unwrap_or(bound);
        let profile = match self.kind.unwrap_or(ProfileKind::Zero) {
            ProfileKind::Zero => DisturbanceProfileF64::Zero,
            ProfileKind::Constant => DisturbanceProfileF64::Constant {
                amplitude,
                sign: self.sign.map_or(Sign::Plus, Sign::from),
            },
            ProfileKind::Sinusoid => DisturbanceProfileF64::Sinusoid {
                amplitude,
                frequency: self.frequency.unwrap_or(2.0),
            },
            ProfileKind::AdversarialSign => DisturbanceProfileF64::AdversarialSign {
                amplitude,
                sign: self.sign.map_or(Sign::Minus, Sign::from),
            },
        };
        if !(amplitude.is_finite() && amplitude >= 0.0) || !profile.is_finite() {
            return Err(CliError::Config(format!(
                "disturbance {} must have a finite non-negative amplitude",
                profile.label()
            )));
        }
        if amplitude > bound {
            return Err(CliError::Config(format!(
                "disturbance {} exceeds the bound N = {bound}",
                profile.label()
            )));
        }
        Ok(profile)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    pub boundary_count: Option<usize>,
    pub interior_count: Option<usize>,
    pub seed: Option<u64>,
    /// Replaces the standard battery when present.
    pub profiles: Option<Vec<DisturbanceSection>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PendulumSection {
    pub m: Option<f64>,
    pub l: Option<f64>,
    #[serde(rename = "J")]
    pub inertia: Option<f64>,
    pub g: Option<f64>,
    pub fv: Option<f64>,
    /// Desired position.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub out: Option<PathBuf>,
}

/// Command-line overrides, one flag per configuration key.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Overrides {
    #[arg(long = "R", value_name = "LEVEL")]
    pub level: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "N", value_name = "BOUND")]
    pub disturbance_bound: Option<f64>,
    #[arg(long = "Ts", value_name = "SECONDS")]
    pub settling_time: Option<f64>,

    #[arg(long)]
    pub mu1: Option<f64>,
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,

    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub record_stride: Option<usize>,
    #[arg(long)]
    pub settle_eps: Option<f64>,
    #[arg(long, value_enum)]
    pub plant: Option<PlantChoice>,
    #[arg(long = "x1-0", allow_hyphen_values = true)]
    pub x1_0: Option<f64>,
    #[arg(long = "x2-0", allow_hyphen_values = true)]
    pub x2_0: Option<f64>,

    #[arg(long, value_enum)]
    pub kind: Option<ProfileKind>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub frequency: Option<f64>,
    #[arg(long, value_enum)]
    pub sign: Option<SignChoice>,

    #[arg(long)]
    pub boundary_count: Option<usize>,
    #[arg(long)]
    pub interior_count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn set<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}

fn require(value: Option<f64>, name: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Config(format!("{name} required")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads `path` (if any) and applies the overrides on top.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)?
            }
            None => Self::default(),
        };
        cfg.apply(overrides);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        let p = &mut self.params;
        set(&mut p.level, &o.level);
        set(&mut p.beta, &o.beta);
        set(&mut p.rho, &o.rho);
        set(&mut p.delta, &o.delta);
        set(&mut p.disturbance_bound, &o.disturbance_bound);
        set(&mut p.settling_time, &o.settling_time);

        let g = &mut self.gains;
        set(&mut g.mu1, &o.mu1);
        set(&mut g.mu2, &o.mu2);
        set(&mut g.margin, &o.margin);

        let s = &mut self.sim;
        set(&mut s.dt, &o.dt);
        set(&mut s.t_end, &o.t_end);
        set(&mut s.record_stride, &o.record_stride);
        set(&mut s.settle_eps, &o.settle_eps);
        set(&mut s.plant, &o.plant);
        set(&mut s.x1_0, &o.x1_0);
        set(&mut s.x2_0, &o.x2_0);

        let d = &mut self.disturbance;
        set(&mut d.kind, &o.kind);
        set(&mut d.amplitude, &o.amplitude);
        set(&mut d.frequency, &o.frequency);
        set(&mut d.sign, &o.sign);

        let c = &mut self.campaign;
        set(&mut c.boundary_count, &o.boundary_count);
        set(&mut c.interior_count, &o.interior_count);
        set(&mut c.seed, &o.seed);

        set(&mut self.output.out, &o.out);
    }

    pub fn params(&self) -> Result<TuningParametersF64, CliError> {
        let p = &self.params;
        Ok(TuningParametersF64::new(
            require(p.level, "R")?,
            require(p.beta, "beta")?,
            require(p.rho, "rho")?,
            require(p.delta, "delta")?,
            require(p.disturbance_bound, "N")?,
            require(p.settling_time, "Ts")?,
        ))
    }

    /// Explicit gains, or gains synthesized from `params` with the margin.
    pub fn gains(&self, params: &TuningParametersF64) -> Result<(GainsF64, GainSource), CliError> {
        match (self.gains.mu1, self.gains.mu2) {
            (Some(mu1), Some(mu2)) => Ok((GainsF64::new(mu1, mu2), GainSource::Given)),
            (None, None) => {
                let margin = self.gains.margin.unwrap_or(DEFAULT_MARGIN);
                let g = synthesize_gains(params, margin)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok((g, GainSource::Synthesized { margin }))
            }
            _ => Err(CliError::Config(
                "mu1 and mu2 must be given together".to_string(),
            )),
        }
    }

    pub fn sim_config(&self, params: &TuningParametersF64) -> SimConfigF64 {
        let s = &self.sim;
        let mut cfg = match (s.dt, s.t_end) {
            (None, None) => SimConfigF64::for_deadline(params.settling_time),
            (dt, t_end) => SimConfigF64::with_step(
                dt.unwrap_or(twisting_core::sim::DEFAULT_DT),
                t_end.unwrap_or(2.0 * params.settling_time),
            ),
        };
        if let Some(stride) = s.record_stride {
            cfg.record_stride = stride;
        }
        if let Some(eps) = s.settle_eps {
            cfg.settle_eps = eps;
        }
        cfg
    }

    pub fn initial_state(&self) -> Result<StateF64, CliError> {
        let x0 = StateF64::new(
            require(self.sim.x1_0, "x1_0")?,
            require(self.sim.x2_0, "x2_0")?,
        );
        if !x0.is_finite() {
            return Err(CliError::Config("initial state must be finite".to_string()));
        }
        Ok(x0)
    }

    pub fn disturbance(&self, bound: f64) -> Result<DisturbanceProfileF64, CliError> {
        self.disturbance.resolve(bound)
    }

    /// `[[campaign.profiles]]` when given, else the single `[disturbance]`
    /// profile when its kind or amplitude is set, else the standard battery.
    pub fn campaign_profiles(&self, bound: f64) -> Result<Vec<DisturbanceProfileF64>, CliError> {
        match &self.campaign.profiles {
            Some(list) => list.iter().map(|d| d.resolve(bound)).collect(),
            None if self.disturbance.kind.is_some() || self.disturbance.amplitude.is_some() => {
                Ok(vec![self.disturbance(bound)?])
            }
            None => Ok(standard_battery(bound)),
        }
    }

    pub fn pendulum(&self) -> Result<PendulumParamsF64, CliError> {
        let lab = PendulumParamsF64::lab();
        let p = &self.pendulum;
        let pp = PendulumParamsF64::new(
            p.m.unwrap_or(lab.mass),
            p.l.unwrap_or(lab.length),
            p.inertia.unwrap_or(lab.inertia),
            p.g.unwrap_or(lab.gravity),
            p.fv.unwrap_or(lab.friction),
            p.r.unwrap_or(lab.reference),
        );
        if !pp.is_physical() {
            return Err(CliError::Config(
                "pendulum needs m, l, J, g > 0 and fv >= 0".to_string(),
            ));
        }
        Ok(pp)
    }

    pub fn plant(&self) -> Result<Plant<f64>, CliError> {
        Ok(
            match self.sim.plant.unwrap_or(PlantChoice::DoubleIntegrator) {
                PlantChoice::DoubleIntegrator => Plant::DoubleIntegrator,
                PlantChoice::Pendulum => Plant::Pendulum(self.pendulum()?),
            },
        )
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Fills every unset tuning, gain, step and disturbance key with the
    /// laboratory pendulum setup: R = 2, beta = 5, rho = 0.5, delta = 3.1,
    /// N = 0.2, Ts = 1 s, gains (6.63, 33.24), dt = 1e-5 s over 2 s, and
    /// d(t) = 7e-4 sin(2t) N m lifted to acceleration by b.
    pub fn fill_lab_defaults(&mut self) -> Result<(), CliError> {
        let p = &mut self.params;
        p.level.get_or_insert(2.0);
        p.beta.get_or_insert(5.0);
        p.rho.get_or_insert(0.5);
        p.delta.get_or_insert(3.1);
        p.disturbance_bound.get_or_insert(0.2);
        p.settling_time.get_or_insert(1.0);
        if self.gains.mu1.is_none() && self.gains.mu2.is_none() {
            self.gains.mu1 = Some(6.63);
            self.gains.mu2 = Some(33.24);
        }
        self.sim.dt.get_or_insert(1e-5);
        self.sim.t_end.get_or_insert(2.0);
        if self.disturbance.kind.is_none() {
            let b = self.pendulum()?.b();
            self.disturbance = DisturbanceSection {
                kind: Some(ProfileKind::Sinusoid),
                amplitude: Some(b * 7e-4),
                frequency: Some(2.0),
                sign: None,
            };
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainSource {
    Given,
    Synthesized { margin: f64 },
}
