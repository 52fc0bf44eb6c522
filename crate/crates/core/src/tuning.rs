//! Design-parameter math: admissibility of the tuning inputs, the gain lower
//! bounds, gain synthesis, and the convergence-time estimate.
//!
//! The tuning inputs are a level `R` of the Lyapunov function, a shape ratio
//! `beta > 1`, an inner-radius fraction `rho` in `(0, 1)`, a radius `delta`
//! with `delta > sqrt(2R)(beta + 1)/(beta - 1)`, the disturbance bound `N` and
//! the deadline `Ts`. Gains satisfying
//!
//! ```text
//! mu1 > 2 delta / (Ts sqrt(1 - beta^-2)) + N
//! mu2 > max{ sqrt(R/2), rho sqrt(R / (2(1 - rho))), rho, beta mu1, mu1 + N }
//! ```
//!
//! settle every trajectory starting on `V = R` before `Ts`.

// `!(x > 0)` rather than `x <= 0` so that NaN fails the checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Ratio between `delta` and its lower bound above which an advisory is emitted.
pub const DELTA_ADVISORY_RATIO: f64 = 10.0;

/// Default multiplicative margin used by [`synthesize_gains`] callers.
pub const DEFAULT_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningParameters<T> {
    /// Level `R` of the initial domain `V(x) <= R`.
    pub level: T,
    pub beta: T,
    pub rho: T,
    pub delta: T,
    /// Disturbance magnitude bound `N`.
    pub disturbance_bound: T,
    /// Prescribed settling time `Ts` in seconds.
    pub settling_time: T,
}

impl<T: Scalar> TuningParameters<T> {
    pub fn new(
        level: T,
        beta: T,
        rho: T,
        delta: T,
        disturbance_bound: T,
        settling_time: T,
    ) -> Self {
        Self {
            level,
            beta,
            rho,
            delta,
            disturbance_bound,
            settling_time,
        }
    }

    /// `sqrt(2R)(beta + 1)/(beta - 1)`, the strict lower bound on `delta`.
    pub fn delta_min(&self) -> T {
        let two = T::lit(2.0);
        (two * self.level).sqrt() * (self.beta + T::one()) / (self.beta - T::one())
    }

    fn named_fields(&self) -> [(&'static str, T); 6] {
        [
            ("R", self.level),
            ("beta", self.beta),
            ("rho", self.rho),
            ("delta", self.delta),
            ("N", self.disturbance_bound),
            ("Ts", self.settling_time),
        ]
    }
}

/// The controller gain pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains<T> {
    pub mu1: T,
    pub mu2: T,
}

impl<T: Scalar> Gains<T> {
    pub fn new(mu1: T, mu2: T) -> Self {
        Self { mu1, mu2 }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self::new(self.mu1 * factor, self.mu2 * factor)
    }

    /// Peak control magnitude `mu1 + mu2`.
    pub fn authority(&self) -> T {
        self.mu1 + self.mu2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParameterViolation {
    NonFinite(&'static str),
    LevelNotPositive,
    BetaNotAboveOne,
    RhoOutsideUnitInterval,
    DeltaTooSmall { delta: f64, delta_min: f64 },
    DisturbanceBoundNegative,
    SettlingTimeNotPositive,
}

impl fmt::Display for ParameterViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFinite(name) => write!(f, "{name} is not finite"),
            Self::LevelNotPositive => write!(f, "R must be > 0"),
            Self::BetaNotAboveOne => write!(f, "beta must exceed 1"),
            Self::RhoOutsideUnitInterval => write!(f, "rho must lie in (0, 1)"),
            Self::DeltaTooSmall { delta, delta_min } => write!(
                f,
                "delta = {delta} must be strictly greater than sqrt(2R)(beta+1)/(beta-1) = {delta_min}"
            ),
            Self::DisturbanceBoundNegative => write!(f, "N must be >= 0"),
            Self::SettlingTimeNotPositive => write!(f, "Ts must be > 0"),
        }
    }
}

/// Non-fatal findings on otherwise admissible parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ParameterAdvisory {
    /// `delta` exceeds [`DELTA_ADVISORY_RATIO`] times its lower bound, which
    /// inflates `mu1` for no benefit.
    DeltaLarge { ratio: f64 },
}

impl fmt::Display for ParameterAdvisory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DeltaLarge { ratio } => write!(
                f,
                "delta is {ratio:.1}x its lower bound; mu1 grows linearly with delta"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterReport<T> {
    pub violations: Vec<ParameterViolation>,
    pub advisories: Vec<ParameterAdvisory>,
    pub delta_min: T,
}

impl<T> ParameterReport<T> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every admissibility constraint with strict inequalities.
///
/// Non-finite inputs are reported per field and suppress the range checks that
/// would otherwise fire on the same field.
pub fn validate_parameters<T: Scalar>(p: &TuningParameters<T>) -> ParameterReport<T> {
    let mut violations = Vec::new();
    for (name, value) in p.named_fields() {
        if !value.is_finite() {
            violations.push(ParameterViolation::NonFinite(name));
        }
    }
    let zero = T::zero();
    let one = T::one();
    let finite = |v: T| v.is_finite();

    if finite(p.level) && !(p.level > zero) {
        violations.push(ParameterViolation::LevelNotPositive);
    }
    if finite(p.beta) && !(p.beta > one) {
        violations.push(ParameterViolation::BetaNotAboveOne);
    }
    if finite(p.rho) && !(p.rho > zero && p.rho < one) {
        violations.push(ParameterViolation::RhoOutsideUnitInterval);
    }
    if finite(p.disturbance_bound) && p.disturbance_bound < zero {
        violations.push(ParameterViolation::DisturbanceBoundNegative);
    }
    if finite(p.settling_time) && !(p.settling_time > zero) {
        violations.push(ParameterViolation::SettlingTimeNotPositive);
    }

    let delta_min = p.delta_min();
    let bound_meaningful = finite(p.level) && p.level > zero && finite(p.beta) && p.beta > one;
    if bound_meaningful && finite(p.delta) && !(p.delta - delta_min > zero) {
        violations.push(ParameterViolation::DeltaTooSmall {
            delta: p.delta.as_f64(),
            delta_min: delta_min.as_f64(),
        });
    }

    let mut advisories = Vec::new();
    if violations.is_empty() {
        let ratio = p.delta / delta_min;
        if ratio > T::lit(DELTA_ADVISORY_RATIO) {
            advisories.push(ParameterAdvisory::DeltaLarge {
                ratio: ratio.as_f64(),
            });
        }
    }

    ParameterReport {
        violations,
        advisories,
        delta_min,
    }
}

fn require_valid<T: Scalar>(p: &TuningParameters<T>) -> Result<()> {
    let report = validate_parameters(p);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(report.violations))
    }
}

fn mu1_bound_unchecked<T: Scalar>(p: &TuningParameters<T>) -> T {
    let two = T::lit(2.0);
    let shape = (T::one() - p.beta.powi(-2)).sqrt();
    two * p.delta / (p.settling_time * shape) + p.disturbance_bound
}

/// `2 delta / (Ts sqrt(1 - beta^-2)) + N`.
pub fn mu1_lower_bound<T: Scalar>(p: &TuningParameters<T>) -> Result<T> {
    require_valid(p)?;
    Ok(mu1_bound_unchecked(p))
}

/// The five candidates whose maximum bounds `mu2` from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mu2Term {
    /// `sqrt(R/2)`, collapses the outer radius to `sqrt(2R)`.
    HalfLevelRoot,
    /// `rho sqrt(R / (2(1 - rho)))`, collapses the inner radius to `rho R / mu2`.
    InnerRadius,
    Rho,
    /// `beta mu1`, keeps `(mu1 - N)/mu2 < 1/beta`.
    BetaMu1,
    /// `mu1 + N`.
    Mu1PlusN,
}

pub const MU2_TERMS: [Mu2Term; 5] = [
    Mu2Term::HalfLevelRoot,
    Mu2Term::InnerRadius,
    Mu2Term::Rho,
    Mu2Term::BetaMu1,
    Mu2Term::Mu1PlusN,
];

/// Values of the five `mu2` bound terms, in [`MU2_TERMS`] order.
pub fn mu2_bound_terms<T: Scalar>(p: &TuningParameters<T>, mu1: T) -> [T; 5] {
    let two = T::lit(2.0);
    [
        (p.level / two).sqrt(),
        p.rho * (p.level / (two * (T::one() - p.rho))).sqrt(),
        p.rho,
        p.beta * mu1,
        mu1 + p.disturbance_bound,
    ]
}

/// The largest of [`mu2_bound_terms`] and which term attains it (first wins ties).
pub fn mu2_binding_term<T: Scalar>(p: &TuningParameters<T>, mu1: T) -> (Mu2Term, T) {
    let terms = mu2_bound_terms(p, mu1);
    let mut best = (MU2_TERMS[0], terms[0]);
    for (term, value) in MU2_TERMS.iter().zip(terms).skip(1) {
        // NaN never wins, matching `Float::max`.
        if value > best.1 {
            best = (*term, value);
        }
    }
    best
}

pub fn mu2_lower_bound<T: Scalar>(p: &TuningParameters<T>, mu1: T) -> Result<T> {
    require_valid(p)?;
    Ok(mu2_binding_term(p, mu1).1)
}

/// Picks `mu1 = (1 + margin) mu1_min`, then `mu2 = (1 + margin) mu2_min(mu1)`.
pub fn synthesize_gains<T: Scalar>(p: &TuningParameters<T>, margin: T) -> Result<Gains<T>> {
    if !(margin.is_finite() && margin > T::zero()) {
        return Err(Error::InvalidMargin(margin.as_f64()));
    }
    let scale = T::one() + margin;
    let mu1 = scale * mu1_lower_bound(p)?;
    let mu2 = scale * mu2_lower_bound(p, mu1)?;
    let gains = Gains::new(mu1, mu2);
    let report = validate_gains(p, &gains);
    if !report.is_ok() {
        // Only reachable when the margin is below the scalar's resolution.
        return Err(Error::InvalidGains(report.violations));
    }
    Ok(gains)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GainViolation {
    Parameters(ParameterViolation),
    NonFinite(&'static str),
    Mu1NotAboveBound { mu1: f64, bound: f64 },
    Mu2NotAboveBound { mu2: f64, bound: f64 },
}

impl fmt::Display for GainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parameters(v) => write!(f, "{v}"),
            Self::NonFinite(name) => write!(f, "{name} is not finite"),
            Self::Mu1NotAboveBound { mu1, bound } => write!(
                f,
                "mu1 = {mu1} must be strictly greater than 2 delta/(Ts sqrt(1-beta^-2)) + N = {bound}"
            ),
            Self::Mu2NotAboveBound { mu2, bound } => write!(
                f,
                "mu2 = {mu2} must be strictly greater than max{{sqrt(R/2), rho sqrt(R/(2(1-rho))), rho, beta mu1, mu1+N}} = {bound}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainReport<T> {
    pub violations: Vec<GainViolation>,
    pub mu1_bound: T,
    pub mu2_bound: T,
    pub mu2_binding: Mu2Term,
    /// `mu1 - mu1_bound`; must be strictly positive.
    pub mu1_margin: T,
    /// `mu2 - mu2_bound`; must be strictly positive.
    pub mu2_margin: T,
}

impl<T> GainReport<T> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks both gain inequalities. Parameter violations are folded into the report.
pub fn validate_gains<T: Scalar>(p: &TuningParameters<T>, g: &Gains<T>) -> GainReport<T> {
    let mut violations: Vec<GainViolation> = validate_parameters(p)
        .violations
        .into_iter()
        .map(GainViolation::Parameters)
        .collect();
    if !g.mu1.is_finite() {
        violations.push(GainViolation::NonFinite("mu1"));
    }
    if !g.mu2.is_finite() {
        violations.push(GainViolation::NonFinite("mu2"));
    }

    let mu1_bound = mu1_bound_unchecked(p);
    let (mu2_binding, mu2_bound) = mu2_binding_term(p, g.mu1);
    let mu1_margin = g.mu1 - mu1_bound;
    let mu2_margin = g.mu2 - mu2_bound;

    if g.mu1.is_finite() && !(mu1_margin > T::zero()) {
        violations.push(GainViolation::Mu1NotAboveBound {
            mu1: g.mu1.as_f64(),
            bound: mu1_bound.as_f64(),
        });
    }
    if g.mu2.is_finite() && !(mu2_margin > T::zero()) {
        violations.push(GainViolation::Mu2NotAboveBound {
            mu2: g.mu2.as_f64(),
            bound: mu2_bound.as_f64(),
        });
    }

    GainReport {
        violations,
        mu1_bound,
        mu2_bound,
        mu2_binding,
        mu1_margin,
        mu2_margin,
    }
}

/// Radii and convergence-time quantities implied by a valid tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettlingEstimate<T> {
    /// Radius of the smallest origin-centred ball containing the level set.
    pub r1: T,
    /// Radius of a ball contained in the level set.
    pub r2: T,
    /// `(mu1 - N) / mu2`.
    pub eta: T,
    /// Convergence-time estimate from the worst boundary point.
    pub t2: T,
    /// `2 delta / ((mu1 - N) sqrt(1 - beta^-2))`, which bounds `t2` and is itself
    /// bounded by `Ts`.
    pub t2_bound: T,
}

pub fn settling_estimate<T: Scalar>(
    p: &TuningParameters<T>,
    g: &Gains<T>,
) -> Result<SettlingEstimate<T>> {
    let report = validate_gains(p, g);
    if !report.is_ok() {
        return Err(Error::InvalidGains(report.violations));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let excess = g.mu1 - p.disturbance_bound;
    let eta = excess / g.mu2;
    let root = (one - eta * eta).sqrt();
    Ok(SettlingEstimate {
        r1: (two * p.level).sqrt(),
        r2: p.rho * p.level / g.mu2,
        eta,
        t2: p.delta * (root + one) / (excess * root),
        t2_bound: two * p.delta / (excess * (one - p.beta.powi(-2)).sqrt()),
    })
}
