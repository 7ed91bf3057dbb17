//! Gaussian double slits and their correspondence with free spins.
//!
//! Two slits at `±d/2` with Gaussian amplitude transmission of width `σ`
//! produce, at detector coordinate `y`, the intensity
//!
//! ```text
//! I(y) ∝ e^{−(y² + d²/4)/σ²} · 2cosh(yd/σ²) · (1 + cos φ(y) / cosh(yd/σ²))
//! ```
//!
//! The fringe visibility is `sech(yd/σ²)` and the which-path predictability
//! is `|tanh(yd/σ²)|`: the same functions of `yd/σ²` that the free-spin
//! susceptibility (square root) and magnetization are of `E/kT`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{integrate_unit_pi, log_cosh, sech, tanh_sech2, QuadratureSpec};

/// Path phase difference `φ(y)`.
#[derive(Clone)]
pub enum Phase {
    /// `φ(y) = κy`
    Linear(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Phase {
    pub fn at(&self, y: f64) -> f64 {
        match self {
            Phase::Linear(kappa) => kappa * y,
            Phase::Custom(f) => f(y),
        }
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Linear(kappa) => f.debug_tuple("Linear").field(kappa).finish(),
            Phase::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SlitGeometry {
    pub d: f64,
    pub sigma: f64,
    pub phase: Phase,
    /// Setup-specific prefactor of the intensity.
    pub envelope_scale: f64,
}

impl SlitGeometry {
    /// Geometry with `φ ≡ 0` and unit envelope.
    pub fn new(d: f64, sigma: f64) -> Result<Self> {
        Self::with_phase(d, sigma, Phase::Linear(0.0))
    }

    pub fn with_phase(d: f64, sigma: f64, phase: Phase) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "slit separation and width must be positive (d={d}, sigma={sigma})"
            )));
        }
        Ok(SlitGeometry {
            d,
            sigma,
            phase,
            envelope_scale: 1.0,
        })
    }

    pub fn envelope(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "envelope scale must be positive, got {scale}"
            )));
        }
        self.envelope_scale = scale;
        Ok(self)
    }

    /// Dimensionless detector argument `yd/σ²`.
    pub fn argument(&self, y: f64) -> f64 {
        y * self.d / (self.sigma * self.sigma)
    }
}

/// Intensity at `y` in the cosh-factored form, evaluated in log space.
pub fn double_slit_intensity(y: f64, g: &SlitGeometry) -> f64 {
    let s2 = g.sigma * g.sigma;
    let u = g.argument(y);
    let log_envelope = -(y * y + 0.25 * g.d * g.d) / s2 + std::f64::consts::LN_2 + log_cosh(u);
    let fringe = 1.0 + g.phase.at(y).cos() * sech(u);
    (g.envelope_scale * log_envelope.exp() * fringe).max(0.0)
}

/// Normalized probabilities of the two paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathProbabilities {
    pub p1: f64,
    pub p2: f64,
}

impl PathProbabilities {
    /// `|p1 − p2|`
    pub fn predictability(&self) -> f64 {
        (self.p1 - self.p2).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complementarity {
    pub visibility: f64,
    pub predictability: f64,
    pub probs: PathProbabilities,
}

impl Complementarity {
    /// `V² + P²`
    pub fn sum(&self) -> f64 {
        self.visibility * self.visibility + self.predictability * self.predictability
    }
}

pub fn visibility_predictability(y: f64, g: &SlitGeometry) -> Complementarity {
    let u = g.argument(y);
    // |a₁|²/|a₂|² = e^{2u}
    let p1 = 1.0 / (1.0 + (-2.0 * u).exp());
    let probs = PathProbabilities { p1, p2: 1.0 - p1 };
    Complementarity {
        visibility: sech(u),
        predictability: u.tanh().abs(),
        probs,
    }
}

/// How thermodynamic parameters are laid onto the slit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrespondenceMap {
    /// `E ↔ y`, `1/k ↔ d`, `T ↔ σ²`.
    EnergyAsPosition,
    /// `E/T ↔ y`, `1/k ↔ d/σ²` (with `σ = 1`).
    RatioAsPosition,
}

/// Thermodynamic input to [`thermo_slit_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermoInput {
    /// Non-interacting two-level systems with splitting `±E`.
    FreeSpin {
        energy: f64,
        temperature: f64,
        boltzmann: f64,
    },
    /// Any interacting chain; not representable by a single double slit.
    Coupled(crate::models::ReducedCouplings),
}

impl ThermoInput {
    pub fn free_spin(energy: f64, temperature: f64, boltzmann: f64) -> Self {
        ThermoInput::FreeSpin {
            energy,
            temperature,
            boltzmann,
        }
    }

    /// Free spins at reduced field `x = E/kT` (taking `k = T = 1`).
    pub fn reduced(x: f64) -> Self {
        Self::free_spin(x, 1.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SlitPoint {
    pub geometry: SlitGeometry,
    pub y: f64,
}

pub fn thermo_slit_map(input: &ThermoInput, variant: CorrespondenceMap) -> Result<SlitPoint> {
    let (energy, temperature, boltzmann) = match *input {
        ThermoInput::FreeSpin {
            energy,
            temperature,
            boltzmann,
        } => (energy, temperature, boltzmann),
        ThermoInput::Coupled(rc) if rc.k == 0.0 => return thermo_slit_map(&ThermoInput::reduced(rc.c), variant),
        ThermoInput::Coupled(_) => {
            return Err(Error::InvalidMap(
                "the slit correspondence is defined for the uncoupled two-level ensemble only".into(),
            ))
        }
    };
    if !(temperature > 0.0) || !(boltzmann > 0.0) || !energy.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need finite energy and positive T, k (E={energy}, T={temperature}, k={boltzmann})"
        )));
    }
    let d = 1.0 / boltzmann;
    let (sigma, y) = match variant {
        CorrespondenceMap::EnergyAsPosition => (temperature.sqrt(), energy),
        CorrespondenceMap::RatioAsPosition => (1.0, energy / temperature),
    };
    Ok(SlitPoint {
        geometry: SlitGeometry::new(d, sigma)?,
        y,
    })
}

/// Continuum array of double slits whose separations follow `2K cos ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitArrayAnalog {
    pub k: f64,
    /// `(1/π)∫₀^π sech²(2K cos ω) dω`
    pub s_analog: f64,
}

impl SlitArrayAnalog {
    pub fn visibility(&self, omega: f64) -> f64 {
        sech(2.0 * self.k * omega.cos())
    }

    pub fn predictability(&self, omega: f64) -> f64 {
        (2.0 * self.k * omega.cos()).tanh().abs()
    }
}

/// Squared visibilities of the array averaged over the band; at zero field
/// this is the XY susceptibility.
pub fn slit_array_analog(k: f64, quad: &QuadratureSpec) -> Result<SlitArrayAnalog> {
    let s_analog = integrate_unit_pi(|w| tanh_sech2(2.0 * k * w.cos()).1, quad)?;
    Ok(SlitArrayAnalog { k, s_analog })
}
