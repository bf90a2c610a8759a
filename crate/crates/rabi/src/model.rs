//! Model parameters, Bogoliubov-frame constants, and the map between the
//! spectral variable x and the physical energy E.
//!
//! Units are fixed to ħ = ω = 1 (cavity frequency 1).  A general ω is
//! supported by rescaling on the caller side: divide Δ, ε, g and the
//! resulting energies by ω.
//!
//! ```
//! use rabi::model::{TwoPhotonParams, derive_squeeze_frame};
//!
//! let p = TwoPhotonParams::new(1.0, 0.3).unwrap();
//! let frame = derive_squeeze_frame(&p).unwrap();
//! assert!((frame.u * frame.u - frame.v * frame.v - 1.0).abs() < 1e-12);
//! assert!((frame.beta2 - 1.25).abs() < 1e-12);
//! ```

use serde::Serialize;

use crate::error::{RabiError, Result};

/// Reject two-photon couplings this close to the g = 1/2 collapse point:
/// beta2 = 1/sqrt(1-4g^2) overflows any useful range beyond it.
pub const TWO_PHOTON_G_MARGIN: f64 = 1e-9;

/// One-photon model: qubit tunneling Δ, static bias ε, linear coupling g ≥ 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnePhotonParams {
    pub delta: f64,
    pub eps: f64,
    pub g: f64,
}

impl OnePhotonParams {
    pub fn new(delta: f64, eps: f64, g: f64) -> Result<Self> {
        if !delta.is_finite() || !eps.is_finite() || !g.is_finite() {
            return Err(RabiError::InvalidParameter(
                "one-photon parameters must be finite".into(),
            ));
        }
        if g < 0.0 {
            return Err(RabiError::InvalidParameter(format!(
                "one-photon coupling g = {g} must be >= 0"
            )));
        }
        Ok(Self { delta, eps, g })
    }

    /// E = x − g².
    pub fn x_to_energy(&self, x: f64) -> f64 {
        x - self.g * self.g
    }

    /// x = E + g².
    pub fn energy_to_x(&self, energy: f64) -> f64 {
        energy + self.g * self.g
    }
}

/// Frame constants of the two displaced frames:
/// α = g² + ε/2, β = 3g² + ε/2 (frame A = a + g) and the primed pair with
/// ε → −ε (frame B = a − g).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnePhotonConstants {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_p: f64,
    pub beta_p: f64,
}

pub fn derive_one_photon_constants(p: &OnePhotonParams) -> OnePhotonConstants {
    let g2 = p.g * p.g;
    OnePhotonConstants {
        alpha: g2 + p.eps / 2.0,
        beta: 3.0 * g2 + p.eps / 2.0,
        alpha_p: g2 - p.eps / 2.0,
        beta_p: 3.0 * g2 - p.eps / 2.0,
    }
}

/// Two-photon model: qubit tunneling Δ and coupling 0 ≤ g < 1/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPhotonParams {
    pub delta: f64,
    pub g: f64,
}

impl TwoPhotonParams {
    pub fn new(delta: f64, g: f64) -> Result<Self> {
        if !delta.is_finite() || !g.is_finite() {
            return Err(RabiError::InvalidParameter(
                "two-photon parameters must be finite".into(),
            ));
        }
        if g < 0.0 || g >= 0.5 - TWO_PHOTON_G_MARGIN {
            return Err(RabiError::CouplingOutOfRange { g });
        }
        Ok(Self { delta, g })
    }
}

/// Squeeze data (u, v, β₂) with u² − v² = 1, u² + v² = β₂ = 1/√(1−4g²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeFrame {
    pub u: f64,
    pub v: f64,
    pub beta2: f64,
}

impl SqueezeFrame {
    /// E = (x − v²)/(u² + v²).
    pub fn x_to_energy(&self, x: f64) -> f64 {
        (x - self.v * self.v) / self.beta2
    }

    /// x = v² + E(u² + v²).
    pub fn energy_to_x(&self, energy: f64) -> f64 {
        self.v * self.v + energy * self.beta2
    }

    /// Energy of the G-function pole at x = n.  Algebraically equal to
    /// (n + 1/2)√(1−4g²) − 1/2, the exceptional-eigenvalue ladder.
    pub fn pole_energy(&self, n: usize) -> f64 {
        self.x_to_energy(n as f64)
    }
}

pub fn derive_squeeze_frame(p: &TwoPhotonParams) -> Result<SqueezeFrame> {
    let disc = 1.0 - 4.0 * p.g * p.g;
    if p.g >= 0.5 - TWO_PHOTON_G_MARGIN {
        return Err(RabiError::CouplingOutOfRange { g: p.g });
    }
    let beta2 = 1.0 / disc.sqrt();
    Ok(SqueezeFrame {
        u: ((beta2 + 1.0) / 2.0).sqrt(),
        v: ((beta2 - 1.0) / 2.0).sqrt(),
        beta2,
    })
}

/// Either model with validated parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelParams {
    OnePhoton(OnePhotonParams),
    TwoPhoton(TwoPhotonParams),
}

impl ModelParams {
    pub fn delta(&self) -> f64 {
        match self {
            ModelParams::OnePhoton(p) => p.delta,
            ModelParams::TwoPhoton(p) => p.delta,
        }
    }

    pub fn g(&self) -> f64 {
        match self {
            ModelParams::OnePhoton(p) => p.g,
            ModelParams::TwoPhoton(p) => p.g,
        }
    }

    pub fn x_to_energy(&self, x: f64) -> Result<f64> {
        Ok(match self {
            ModelParams::OnePhoton(p) => p.x_to_energy(x),
            ModelParams::TwoPhoton(p) => derive_squeeze_frame(p)?.x_to_energy(x),
        })
    }

    pub fn energy_to_x(&self, energy: f64) -> Result<f64> {
        Ok(match self {
            ModelParams::OnePhoton(p) => p.energy_to_x(energy),
            ModelParams::TwoPhoton(p) => derive_squeeze_frame(p)?.energy_to_x(energy),
        })
    }
}

/// The ± branch of a G-function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }
}

/// Photon-number parity of a two-photon coefficient chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FockParity {
    Even,
    Odd,
}

impl FockParity {
    pub fn start_index(self) -> usize {
        match self {
            FockParity::Even => 0,
            FockParity::Odd => 1,
        }
    }

    pub fn matches(self, n: usize) -> bool {
        n % 2 == self.start_index()
    }
}

/// Displaced frame of the one-photon model: A = a + g or B = a − g.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DisplacedFrame {
    A,
    B,
}

/// One label per G-branch (plus the two displacement-series branches).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SectorLabel {
    #[serde(rename = "1p-plus")]
    OnePhotonPlus,
    #[serde(rename = "1p-minus")]
    OnePhotonMinus,
    #[serde(rename = "1p-biased")]
    OnePhotonBiased,
    #[serde(rename = "2p-even-plus")]
    TwoPhotonEvenPlus,
    #[serde(rename = "2p-even-minus")]
    TwoPhotonEvenMinus,
    #[serde(rename = "2p-odd-plus")]
    TwoPhotonOddPlus,
    #[serde(rename = "2p-odd-minus")]
    TwoPhotonOddMinus,
    #[serde(rename = "falpha-plus")]
    FAlphaPlus,
    #[serde(rename = "falpha-minus")]
    FAlphaMinus,
}

impl SectorLabel {
    pub fn two_photon(fock: FockParity, parity: Parity) -> Self {
        match (fock, parity) {
            (FockParity::Even, Parity::Plus) => SectorLabel::TwoPhotonEvenPlus,
            (FockParity::Even, Parity::Minus) => SectorLabel::TwoPhotonEvenMinus,
            (FockParity::Odd, Parity::Plus) => SectorLabel::TwoPhotonOddPlus,
            (FockParity::Odd, Parity::Minus) => SectorLabel::TwoPhotonOddMinus,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SectorLabel::OnePhotonPlus => "1p-plus",
            SectorLabel::OnePhotonMinus => "1p-minus",
            SectorLabel::OnePhotonBiased => "1p-biased",
            SectorLabel::TwoPhotonEvenPlus => "2p-even-plus",
            SectorLabel::TwoPhotonEvenMinus => "2p-even-minus",
            SectorLabel::TwoPhotonOddPlus => "2p-odd-plus",
            SectorLabel::TwoPhotonOddMinus => "2p-odd-minus",
            SectorLabel::FAlphaPlus => "falpha-plus",
            SectorLabel::FAlphaMinus => "falpha-minus",
        }
    }
}

impl std::fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
