//! Single-qubit noise channels, coherence-time calibration, and sampled
//! Pauli emulation of the depolarizing channel.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Superop, C64, ZERO};

/// Completeness tolerance for the built-in channels.
pub const COMPLETENESS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "ad")]
    AmplitudeDamping,
    #[serde(rename = "pd")]
    PhaseDamping,
    #[serde(rename = "dp")]
    Depolarizing,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::AmplitudeDamping,
        ChannelKind::PhaseDamping,
        ChannelKind::Depolarizing,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::AmplitudeDamping => "ad",
            ChannelKind::PhaseDamping => "pd",
            ChannelKind::Depolarizing => "dp",
        }
    }

    pub fn kraus(self, gamma: f64) -> Result<KrausSet> {
        match self {
            ChannelKind::AmplitudeDamping => amplitude_damping(gamma),
            ChannelKind::PhaseDamping => phase_damping(gamma),
            ChannelKind::Depolarizing => depolarizing(gamma),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ad" | "amplitude_damping" | "amplitude-damping" => Ok(ChannelKind::AmplitudeDamping),
            "pd" | "phase_damping" | "phase-damping" => Ok(ChannelKind::PhaseDamping),
            "dp" | "depolarizing" => Ok(ChannelKind::Depolarizing),
            other => Err(Error::invalid(format!("unknown channel '{other}'"))),
        }
    }
}

/// Ordered Kraus operators of one of the three channels.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    kind: ChannelKind,
    gamma: f64,
    operators: Vec<Mat2>,
}

impl KrausSet {
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn operators(&self) -> &[Mat2] {
        &self.operators
    }

    pub fn completeness_error(&self) -> f64 {
        linalg::completeness_error(&self.operators)
    }

    pub(crate) fn superop(&self) -> Superop {
        Superop::from_kraus(&self.operators)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    Ok(())
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// E0 = diag(1, √(1−γ)), E1 = [[0, √γ], [0, 0]]
pub fn amplitude_damping(gamma: f64) -> Result<KrausSet> {
    check_gamma(gamma)?;
    let e0 = [[real(1.0), ZERO], [ZERO, real((1.0 - gamma).sqrt())]];
    let e1 = [[ZERO, real(gamma.sqrt())], [ZERO, ZERO]];
    Ok(KrausSet {
        kind: ChannelKind::AmplitudeDamping,
        gamma,
        operators: vec![e0, e1],
    })
}

/// E0 = diag(1, √(1−γ)), E1 = diag(0, √γ)
pub fn phase_damping(gamma: f64) -> Result<KrausSet> {
    check_gamma(gamma)?;
    let e0 = [[real(1.0), ZERO], [ZERO, real((1.0 - gamma).sqrt())]];
    let e1 = [[ZERO, ZERO], [ZERO, real(gamma.sqrt())]];
    Ok(KrausSet {
        kind: ChannelKind::PhaseDamping,
        gamma,
        operators: vec![e0, e1],
    })
}

/// E0 = √(1−γ) I, then √(γ/3) times Z (phase flip), X (bit flip) and
/// Y (phase-bit flip), in that order.
pub fn depolarizing(gamma: f64) -> Result<KrausSet> {
    check_gamma(gamma)?;
    let a = (1.0 - gamma).sqrt();
    let b = (gamma / 3.0).sqrt();
    Ok(KrausSet {
        kind: ChannelKind::Depolarizing,
        gamma,
        operators: vec![
            linalg::scale2(&linalg::identity2(), a),
            linalg::scale2(&linalg::pauli_z(), b),
            linalg::scale2(&linalg::pauli_x(), b),
            linalg::scale2(&linalg::pauli_y(), b),
        ],
    })
}

/// Channel kind (or none) plus strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: Option<ChannelKind>,
    pub gamma: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { kind: None, gamma: 0.0 }
    }

    pub fn new(kind: ChannelKind, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { kind: Some(kind), gamma })
    }

    pub fn is_none(&self) -> bool {
        self.kind.is_none()
    }

    pub fn label(&self) -> &'static str {
        self.kind.map_or("none", ChannelKind::label)
    }

    pub fn kraus(&self) -> Result<Option<KrausSet>> {
        match self.kind {
            None => Ok(None),
            Some(kind) => kind.kraus(self.gamma).map(Some),
        }
    }
}

/// Vendor-quoted relaxation time, dephasing time and gate time, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardwareCoherence {
    pub t1: f64,
    pub t2: f64,
    pub t_gate: f64,
}

impl HardwareCoherence {
    pub fn new(t1: f64, t2: f64, t_gate: f64) -> Result<Self> {
        let hw = Self { t1, t2, t_gate };
        hw.validate()?;
        Ok(hw)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t1", self.t1), ("t2", self.t2), ("t_gate", self.t_gate)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be a positive duration, got {v}")));
            }
        }
        Ok(())
    }

    /// Physical constraint T2 ≤ 2·T1; violations are reported, not rejected.
    pub fn warning(&self) -> Option<String> {
        (self.t2 > 2.0 * self.t1).then(|| {
            format!("T2 = {}s exceeds 2·T1 = {}s; check the vendor figures", self.t2, 2.0 * self.t1)
        })
    }
}

/// γ_AD = 1 − exp(−T_G / T_1)
pub fn gamma_from_t1(hw: &HardwareCoherence) -> Result<f64> {
    hw.validate()?;
    Ok(-(-hw.t_gate / hw.t1).exp_m1())
}

/// γ_PD = 1 − exp(−T_G / T_2)
pub fn gamma_from_t2(hw: &HardwareCoherence) -> Result<f64> {
    hw.validate()?;
    Ok(-(-hw.t_gate / hw.t2).exp_m1())
}

/// Parse a duration such as `25us`, `240ns`, `1.5ms` or `10s` into seconds.
pub fn parse_duration(text: &str) -> Result<f64> {
    let t = text.trim();
    // divide rather than multiply so "240ns" parses to exactly 2.4e-7
    let (num, per_second) = if let Some(v) = t.strip_suffix("ns") {
        (v, 1e9)
    } else if let Some(v) = t.strip_suffix("us").or_else(|| t.strip_suffix("µs")) {
        (v, 1e6)
    } else if let Some(v) = t.strip_suffix("ms") {
        (v, 1e3)
    } else if let Some(v) = t.strip_suffix('s') {
        (v, 1.0)
    } else {
        return Err(Error::invalid(format!("duration '{text}' needs a unit suffix (s, ms, us, ns)")));
    };
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("cannot parse duration '{text}'")))?;
    Ok(value / per_second)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => linalg::identity2(),
            Pauli::X => linalg::pauli_x(),
            Pauli::Y => linalg::pauli_y(),
            Pauli::Z => linalg::pauli_z(),
        }
    }
}

/// Draw I with probability 1−γ, otherwise X, Y or Z uniformly.
pub fn sample_depolarizing_pauli<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> Result<Pauli> {
    check_gamma(gamma)?;
    Ok(draw_pauli(gamma, rng.gen::<f64>()))
}

pub(crate) fn draw_pauli(gamma: f64, u: f64) -> Pauli {
    let keep = 1.0 - gamma;
    if u < keep {
        return Pauli::I;
    }
    let k = ((u - keep) / (gamma / 3.0)) as usize;
    match k {
        0 => Pauli::X,
        1 => Pauli::Y,
        _ => Pauli::Z,
    }
}
