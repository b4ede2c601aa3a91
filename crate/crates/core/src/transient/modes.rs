use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equation family in time. All share the spatial operator ∇².
///
/// * Wave: u_tt = c²∇²u
/// * Diffusion: u_t = h²∇²u
/// * DampedWave: u_tt + R·c²·u_t = c²∇²u
/// * TransmissionLine: u_tt + R·c²·u_t + c²·S·u = c²∇²u
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Wave { c: f64 },
    Diffusion { h: f64 },
    DampedWave { c: f64, damping: f64 },
    TransmissionLine { c: f64, damping: f64, s: f64 },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("equation.{name}"), "must be finite and > 0"))
            }
        };
        let damping = |v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param("equation.damping", "must be finite and >= 0"))
            }
        };
        match *self {
            Family::Wave { c } => positive(c, "c"),
            Family::Diffusion { h } => positive(h, "h"),
            Family::DampedWave { c, damping: r } => positive(c, "c").and(damping(r)),
            Family::TransmissionLine { c, damping: r, s } => {
                positive(c, "c")?;
                damping(r)?;
                if s.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("equation.s", "must be finite"))
                }
            }
        }
    }

    pub fn is_first_order(&self) -> bool {
        matches!(self, Family::Diffusion { .. })
    }

    /// Zeroth-order spatial shift μ of the steady problem ∇²w − μw = f.
    pub fn shift(&self) -> f64 {
        match *self {
            Family::TransmissionLine { s, .. } => s,
            _ => 0.0,
        }
    }

    /// Residual of the governing equation from u, u_t, u_tt, ∇²u and the
    /// forcing f (the steady state satisfies ∇²w − μw = f).
    pub fn residual(&self, u: f64, ut: f64, utt: f64, lap: f64, f: f64) -> f64 {
        match *self {
            Family::Wave { c } => utt - c * c * (lap - f),
            Family::Diffusion { h } => ut - h * h * (lap - f),
            Family::DampedWave { c, damping } => utt + damping * c * c * ut - c * c * (lap - f),
            Family::TransmissionLine { c, damping, s } => {
                utt + damping * c * c * ut + c * c * s * u - c * c * (lap - f)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Oscillatory {
        omega: f64,
    },
    Underdamped {
        sigma: f64,
        omega: f64,
    },
    Critical {
        sigma: f64,
    },
    /// Real roots s1 ≥ s2.
    Overdamped {
        s1: f64,
        s2: f64,
    },
    PureDecay {
        kappa: f64,
    },
    Polynomial,
}

/// Time factors of one spatial mode: T_A with T_A(0) = 1, T_A'(0) = 0 and
/// T_B with T_B(0) = 0, T_B'(0) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalMode {
    pub wavenumber: f64,
    pub regime: Regime,
}

/// Values at t: (T_A, T_B, T_A', T_B').
pub type ModeValues = (f64, f64, f64, f64);

impl TemporalMode {
    pub fn has_velocity(&self) -> bool {
        !matches!(self.regime, Regime::PureDecay { .. })
    }

    /// Factor between the velocity amplitude B and T_B'(0): ω for the
    /// oscillating regimes, 1 otherwise. B·frequency·T_B(t) is the velocity
    /// term of the solution.
    pub fn frequency(&self) -> f64 {
        match self.regime {
            Regime::Oscillatory { omega } | Regime::Underdamped { omega, .. } => omega,
            _ => 1.0,
        }
    }

    pub fn values(&self, t: f64) -> ModeValues {
        match self.regime {
            Regime::Oscillatory { omega } => {
                let (s, c) = (omega * t).sin_cos();
                (c, s / omega, -omega * s, c)
            }
            Regime::Underdamped { sigma, omega } => {
                let e = (-sigma * t).exp();
                let (s, c) = (omega * t).sin_cos();
                let k = sigma / omega;
                (
                    e * (c + k * s),
                    e * s / omega,
                    -e * (sigma * sigma + omega * omega) / omega * s,
                    e * (c - k * s),
                )
            }
            Regime::Critical { sigma } => {
                let e = (-sigma * t).exp();
                (
                    (1.0 + sigma * t) * e,
                    t * e,
                    -sigma * sigma * t * e,
                    (1.0 - sigma * t) * e,
                )
            }
            Regime::Overdamped { s1, s2 } => {
                let d = s1 - s2;
                let (e1, e2) = ((s1 * t).exp(), (s2 * t).exp());
                // (e^{s1 t} − e^{s2 t})/(s1 − s2) without cancellation
                let tb = e2 * (d * t).exp_m1() / d;
                let ta = e1 - s1 * tb;
                (ta, tb, s1 * s2 * -tb, e1 + s2 * tb)
            }
            Regime::PureDecay { kappa } => {
                let e = (-kappa * t).exp();
                (e, 0.0, -kappa * e, 0.0)
            }
            Regime::Polynomial => (1.0, t, 0.0, 1.0),
        }
    }
}

/// Relative discriminant band classified as a double root.
const CRITICAL_BAND: f64 = 1e-10;

/// Roots of T'' + a·T' + b·T = 0.
fn second_order(wavenumber: f64, a: f64, b: f64) -> TemporalMode {
    let regime = if a == 0.0 {
        if b > 0.0 {
            Regime::Oscillatory { omega: b.sqrt() }
        } else if b == 0.0 {
            Regime::Polynomial
        } else {
            let s = (-b).sqrt();
            Regime::Overdamped { s1: s, s2: -s }
        }
    } else {
        let disc = a * a - 4.0 * b;
        if disc.abs() <= CRITICAL_BAND * a * a {
            Regime::Critical { sigma: a / 2.0 }
        } else if disc < 0.0 {
            Regime::Underdamped {
                sigma: a / 2.0,
                omega: (-disc).sqrt() / 2.0,
            }
        } else {
            let q = -(a + disc.sqrt()) / 2.0;
            Regime::Overdamped { s1: b / q, s2: q }
        }
    };
    TemporalMode { wavenumber, regime }
}

/// Time behaviour of the mode with Helmholtz wavenumber λ (−∇²v = λ²v).
pub fn temporal_modes(family: &Family, lambda: f64) -> Result<TemporalMode> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "wavenumber must be finite and >= 0, got {lambda}"
        )));
    }
    family.validate()?;
    Ok(match *family {
        Family::Wave { c } => {
            if lambda == 0.0 {
                TemporalMode {
                    wavenumber: 0.0,
                    regime: Regime::Polynomial,
                }
            } else {
                TemporalMode {
                    wavenumber: lambda,
                    regime: Regime::Oscillatory { omega: c * lambda },
                }
            }
        }
        Family::Diffusion { h } => TemporalMode {
            wavenumber: lambda,
            regime: Regime::PureDecay {
                kappa: h * h * lambda * lambda,
            },
        },
        Family::DampedWave { c, damping } => second_order(lambda, damping * c * c, c * c * lambda * lambda),
        Family::TransmissionLine { c, damping, s } => {
            second_order(lambda, damping * c * c, c * c * (lambda * lambda + s))
        }
    })
}
