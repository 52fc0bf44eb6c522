//! Plants, the twisting control law, the Lyapunov function and the admissible
//! disturbance profiles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{sgn, Gains, Scalar};

/// Phase-plane point in error coordinates. Also used for state derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State<T> {
    pub x1: T,
    pub x2: T,
}

impl<T: Scalar> State<T> {
    pub fn new(x1: T, x2: T) -> Self {
        Self { x1, x2 }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn norm(&self) -> T {
        self.x1.hypot(self.x2)
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    /// `self + h * rate`, one explicit Euler update.
    pub fn advance(&self, rate: &Self, h: T) -> Self {
        Self::new(self.x1 + h * rate.x1, self.x2 + h * rate.x2)
    }
}

impl<T: Scalar> std::ops::Neg for State<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.x1, -self.x2)
    }
}

/// `u = -mu2 sgn(x1) - mu1 sgn(x2)` with `sgn(0) = 0`.
pub fn twisting_control<T: Scalar>(s: &State<T>, g: &Gains<T>) -> T {
    -g.mu2 * sgn(s.x1) - g.mu1 * sgn(s.x2)
}

/// `V = mu2 |x1| + x2^2 / 2`.
pub fn lyapunov<T: Scalar>(s: &State<T>, g: &Gains<T>) -> T {
    g.mu2 * s.x1.abs() + s.x2 * s.x2 / T::lit(2.0)
}

pub fn double_integrator_rhs<T: Scalar>(s: &State<T>, u: T, omega: T) -> State<T> {
    State::new(s.x2, u + omega)
}

/// Physical pendulum data. `b = 1/(m l^2 + J)` is derived on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams<T> {
    pub mass: T,
    pub length: T,
    pub inertia: T,
    pub gravity: T,
    pub friction: T,
    /// Desired angular position `r`; the state is `(q - r, q')`.
    pub reference: T,
    b: T,
}

impl<T: Scalar> PendulumParams<T> {
    pub fn new(mass: T, length: T, inertia: T, gravity: T, friction: T, reference: T) -> Self {
        let b = T::one() / (mass * length * length + inertia);
        Self {
            mass,
            length,
            inertia,
            gravity,
            friction,
            reference,
            b,
        }
    }

    /// The laboratory pendulum: 47.4 g at 0.11 m, J = 3.11e-3 kg m^2,
    /// viscous friction 2.43e-4 N s/rad, regulated to `q = 0`.
    pub fn lab() -> Self {
        Self::new(
            T::lit(0.0474),
            T::lit(0.11),
            T::lit(3.11e-3),
            T::lit(9.81),
            T::lit(2.43e-4),
            T::zero(),
        )
    }

    /// Input coefficient `1/(m l^2 + J)`.
    pub fn b(&self) -> T {
        self.b
    }

    pub fn is_physical(&self) -> bool {
        let zero = T::zero();
        self.mass > zero
            && self.length > zero
            && self.inertia > zero
            && self.gravity > zero
            && self.friction >= zero
            && self.reference.is_finite()
    }

    fn gravity_torque(&self, x1: T) -> T {
        self.mass * self.gravity * self.length * (x1 + self.reference).sin()
    }
}

/// Actuator torque that cancels friction and gravity and injects `u`:
/// `tau = u/b + fv x2 + m g l sin(x1 + r)`.
pub fn compensating_torque<T: Scalar>(s: &State<T>, pp: &PendulumParams<T>, u: T) -> T {
    u / pp.b + pp.friction * s.x2 + pp.gravity_torque(s.x1)
}

/// Pendulum error dynamics under torque `tau` and torque-level disturbance `d`.
pub fn pendulum_rhs<T: Scalar>(s: &State<T>, pp: &PendulumParams<T>, tau: T, d: T) -> State<T> {
    let accel = pp.b * (tau - pp.friction * s.x2 - pp.gravity_torque(s.x1)) + pp.b * d;
    State::new(s.x2, accel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value<T: Scalar>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Acceleration-level disturbance signals with `|w| <= amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DisturbanceProfile<T> {
    Zero,
    Constant {
        amplitude: T,
        sign: Sign,
    },
    Sinusoid {
        amplitude: T,
        frequency: T,
    },
    /// `-sign * amplitude * sgn(x2)`. With `Sign::Minus` the disturbance pushes
    /// along the velocity, against the `mu1` braking term.
    AdversarialSign {
        amplitude: T,
        sign: Sign,
    },
}

impl<T: Scalar> DisturbanceProfile<T> {
    pub fn evaluate(&self, t: T, s: &State<T>) -> T {
        match *self {
            Self::Zero => T::zero(),
            Self::Constant { amplitude, sign } => sign.value::<T>() * amplitude,
            Self::Sinusoid {
                amplitude,
                frequency,
            } => amplitude * (frequency * t).sin(),
            Self::AdversarialSign { amplitude, sign } => -sign.value::<T>() * amplitude * sgn(s.x2),
        }
    }

    /// Supremum of `|w|` over time and state.
    pub fn amplitude(&self) -> T {
        match *self {
            Self::Zero => T::zero(),
            Self::Constant { amplitude, .. }
            | Self::Sinusoid { amplitude, .. }
            | Self::AdversarialSign { amplitude, .. } => amplitude.abs(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            Self::Zero => true,
            Self::Constant { amplitude, .. } | Self::AdversarialSign { amplitude, .. } => {
                amplitude.is_finite()
            }
            Self::Sinusoid {
                amplitude,
                frequency,
            } => amplitude.is_finite() && frequency.is_finite(),
        }
    }

    /// Short comma-free label used in reports.
    pub fn label(&self) -> String {
        match self {
            Self::Zero => "zero".to_string(),
            Self::Constant { amplitude, sign } => format!("constant({sign}{amplitude})"),
            Self::Sinusoid {
                amplitude,
                frequency,
            } => format!("sinusoid(A={amplitude} w={frequency})"),
            Self::AdversarialSign { amplitude, sign } => format!("adversarial({sign}{amplitude})"),
        }
    }
}
