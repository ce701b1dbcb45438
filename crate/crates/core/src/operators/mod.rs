//! Kernels, Galerkin assembly of the layer operators, the screened
//! regulariser, the energy form and plane-wave right-hand sides.

mod dense;
pub mod pairs;
mod rhs;
mod screened;

pub use dense::{assemble_dense, assemble_double_layer_pv, assemble_energy, assemble_helmholtz, assemble_single_layer, energy_quadratic, single_layer_split, DenseKernel, HelmholtzBlocks, SingleLayerSplit};
pub use rhs::{interpolate_cauchy, planewave_rhs, test_cauchy, PlaneWave};
pub use screened::{assemble_screened, screened_kernel};

use crate::spaces::SpaceError;
use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum OperatorError {
    #[error("wavenumber must be non-zero")]
    ZeroWavenumber,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("test and trial spaces live on different level meshes")]
    LevelMismatch,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

pub type Result<T> = std::result::Result<T, OperatorError>;

/// Relative material parameters. With the free-space impedance scaled out,
/// κ = κ₀√(εμ) and η = √(μ/ε).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub eps_r: C64,
    pub mu_r: C64,
}

impl Material {
    pub fn new(eps_r: C64, mu_r: C64) -> Result<Self> {
        if eps_r.re <= 0.0 || mu_r.re <= 0.0 {
            return Err(OperatorError::Parameter(format!("material ({eps_r}, {mu_r}) needs positive real parts")));
        }
        Ok(Material { eps_r, mu_r })
    }

    pub fn real(eps_r: f64, mu_r: f64) -> Result<Self> {
        Self::new(C64::new(eps_r, 0.0), C64::new(mu_r, 0.0))
    }

    pub fn vacuum() -> Self {
        Material { eps_r: C64::new(1.0, 0.0), mu_r: C64::new(1.0, 0.0) }
    }

    pub fn kappa(&self, kappa0: f64) -> C64 {
        kappa0 * (self.eps_r * self.mu_r).sqrt()
    }

    pub fn eta(&self) -> C64 {
        (self.mu_r / self.eps_r).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Screening {
    /// exp(−r²/δ²)
    #[default]
    Gaussian,
    /// exp(−r/δ²), the formula as literally printed.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Helmholtz(C64),
    Screened { delta: f64, cutoff_factor: f64, screening: Screening },
    Decaying(f64),
}

impl KernelSpec {
    pub fn screened(delta: f64) -> Self {
        KernelSpec::Screened { delta, cutoff_factor: 3.5, screening: Screening::Gaussian }
    }

    /// Kernel value at distance r.
    pub fn eval(&self, r: f64) -> C64 {
        let four_pi_r = 4.0 * std::f64::consts::PI * r;
        match *self {
            KernelSpec::Helmholtz(k) => (-C64::i() * k * r).exp() / four_pi_r,
            KernelSpec::Screened { delta, cutoff_factor, screening } => {
                C64::new(screened_kernel(r, delta, cutoff_factor, screening), 0.0)
            }
            KernelSpec::Decaying(k0) => C64::new((-k0 * r).exp() / four_pi_r, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Helmholtz(k) if k.norm() == 0.0 => Err(OperatorError::ZeroWavenumber),
            KernelSpec::Screened { delta, cutoff_factor, .. } if !(delta > 0.0 && cutoff_factor > 0.0) => {
                Err(OperatorError::Parameter(format!("screened kernel needs δ > 0 and cutoff > 0, got {delta}, {cutoff_factor}")))
            }
            KernelSpec::Decaying(k) if !(k > 0.0) => Err(OperatorError::Parameter(format!("κ₀ must be positive, got {k}"))),
            _ => Ok(()),
        }
    }
}
