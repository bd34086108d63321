//! Numerics for an axisymmetric-without-swirl vortex ring carrying a
//! turbulent core: vorticity profiles on the unit disk, the ring's
//! thickness/height/rotation evolution, the meridional Biot-Savart
//! velocity, a compactly supported Reynolds stress obtained from an
//! antidivergence operator, and the logarithmic energy scaling law.
//!
//! All fields live on the meridional half-plane `{(r, z) : r > 0}`,
//! identified with complex numbers `zeta = r + i z`. The flow is
//! described by a circulation `gamma`, a ring radius `L` and a
//! turbulence viscosity `nu_tur`; the core has thickness
//! `c(t) = sqrt(nu_tur * t)` and is parametrized by internal polar
//! coordinates `(rho, alpha)` on the unit disk.

pub mod biotsavart;
pub mod energy;
mod error;
pub mod geometry;
pub mod kernels;
pub mod numerics;
pub mod profile;
pub mod reynolds;
pub mod ring;

pub use biotsavart::{FieldTable, GridSpec, VelocitySample};
pub use energy::{EnergyReport, KineticEnergy, SlopeFit};
pub use error::Error;
pub use geometry::{HalfPlanePoint, SymTensor2, Vec2};
pub use kernels::KernelTable;
pub use profile::{RotationSpeed, VorticityProfile};
pub use reynolds::{ForcingCompat, ForcingField, PressureCorrector, SymTensorField};
pub use ring::{Ring, RingParams, RingState};

/// Everything the subsolution pipeline needs at a given time: the ring
/// geometry, the vorticity profile and a kernel table for Biot-Savart
/// evaluations. Methods are pure and safe to call concurrently.
#[derive(Clone)]
pub struct Subsolution {
    ring: ring::Ring,
    table: std::sync::Arc<kernels::KernelTable>,
    quad_tol: f64,
}

impl Subsolution {
    /// Build the pipeline with the default quadrature tolerance (1e-8).
    pub fn new(params: ring::RingParams, profile: profile::VorticityProfile) -> Self {
        Self::with_quad_tol(params, profile, 1e-8)
    }

    pub fn with_quad_tol(
        params: ring::RingParams,
        profile: profile::VorticityProfile,
        quad_tol: f64,
    ) -> Self {
        let table = kernels::KernelTable::shared_for(quad_tol);
        Subsolution {
            ring: ring::Ring::new(params, profile),
            table,
            quad_tol,
        }
    }

    pub fn ring(&self) -> &ring::Ring {
        &self.ring
    }

    pub fn params(&self) -> &ring::RingParams {
        self.ring.params()
    }

    pub fn profile(&self) -> &profile::VorticityProfile {
        self.ring.profile()
    }

    pub fn kernel_table(&self) -> &std::sync::Arc<kernels::KernelTable> {
        &self.table
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }
}

pub type Result<T> = std::result::Result<T, Error>;
