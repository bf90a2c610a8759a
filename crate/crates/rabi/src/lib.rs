//! Exact spectra of the quantum Rabi models from Bogoliubov-frame
//! G-functions.
//!
//! The one-photon model (with or without a static bias) and the two-photon
//! model are solved by expanding the eigenstates in Fock spaces of displaced
//! or squeezed Bogoliubov operators.  Requiring the two frame expansions of
//! one eigenstate to be proportional produces a transcendental G-function of
//! a spectral variable x whose zeros are the exact eigenvalues; level
//! crossings hide at the poles of G and are recovered separately through the
//! lift condition on the pole numerator.
//!
//! Every result can be cross-checked against a truncated-Fock-space exact
//! diagonalization oracle, including eigenstate residuals and the
//! frame-proportionality defect.
//!
//! ```
//! use rabi::model::{ModelParams, OnePhotonParams};
//! use rabi::roots::{find_spectrum, ScanConfig};
//!
//! // Deep strong coupling at zero bias.
//! let params = OnePhotonParams::new(0.4, 0.0, 0.7).unwrap();
//! let model = ModelParams::OnePhoton(params);
//! let spectrum = find_spectrum(&model, (-1.0, 2.0), &ScanConfig::default()).unwrap();
//!
//! let ground = spectrum.roots[0].energy;
//! assert!((ground - -0.583597993).abs() < 1e-8);
//! ```

pub mod chains;
pub mod error;
pub mod extreal;
pub mod gfunc;
pub mod model;
pub mod roots;

pub use error::{RabiError, Result};
