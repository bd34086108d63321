//! Geometry and time evolution of the turbulence ring.
//!
//! The core cross-section at time `t` is the disk of thickness
//! `c(t) = sqrt(nu_tur t)` centered at `zeta_0 = (L, h(t))`, with
//! internal polar coordinates `(rho, alpha)` twisted by the layerwise
//! rotation angle `a(t, rho)`:
//!
//! ```text
//!   gamma(t, rho, alpha) = L + i h(t) + c(t) rho e^{i(alpha + a(t, rho))}
//!   h(t) = gamma/(8 pi L) (1 - 2 log c(t)) t
//!   a(t, rho) = -gamma_rho/(2 pi nu_tur) log t
//! ```
//!
//! so that `dh/dt = -gamma/(4 pi L) log c` and
//! `da/dt = -gamma_rho/(2 pi c^2)` hold exactly.

use serde::{Deserialize, Serialize};

use crate::geometry::{HalfPlanePoint, Vec2};
use crate::profile::VorticityProfile;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

/// Physical parameters of the ring: radius `L`, circulation and
/// turbulence viscosity. The associated turbulence Reynolds number
/// `|gamma| / nu_tur` is kept as a consistency check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RingParams {
    length: f64,
    circulation: f64,
    nu_tur: f64,
}

impl RingParams {
    pub fn new(length: f64, circulation: f64, nu_tur: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::invalid("ring radius must be positive"));
        }
        if circulation == 0.0 || !circulation.is_finite() {
            return Err(Error::invalid("circulation must be nonzero"));
        }
        if !(nu_tur > 0.0) {
            return Err(Error::invalid("turbulence viscosity must be positive"));
        }
        Ok(RingParams {
            length,
            circulation,
            nu_tur,
        })
    }

    /// Construct from a turbulence Reynolds number, with
    /// `nu_tur = |gamma| / re_tur`.
    pub fn with_reynolds(length: f64, circulation: f64, re_tur: f64) -> Result<Self> {
        if !(re_tur > 0.0) {
            return Err(Error::invalid("turbulence Reynolds number must be positive"));
        }
        Self::new(length, circulation, circulation.abs() / re_tur)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn circulation(&self) -> f64 {
        self.circulation
    }

    pub fn nu_tur(&self) -> f64 {
        self.nu_tur
    }

    pub fn re_tur(&self) -> f64 {
        self.circulation.abs() / self.nu_tur
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("time must be positive, got {t}")));
        }
        Ok(())
    }

    /// Core thickness `c(t) = sqrt(nu_tur t)`.
    pub fn thickness(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok((self.nu_tur * t).sqrt())
    }

    /// `dc/dt = nu_tur / (2c)`.
    pub fn thickness_rate(&self, t: f64) -> Result<f64> {
        Ok(self.nu_tur / (2.0 * self.thickness(t)?))
    }

    /// Ring height `h(t) = gamma/(8 pi L) (1 - 2 log c(t)) t`.
    pub fn height(&self, t: f64) -> Result<f64> {
        let c = self.thickness(t)?;
        Ok(self.circulation / (8.0 * PI * self.length) * (1.0 - 2.0 * c.ln()) * t)
    }

    /// `dh/dt = -gamma/(4 pi L) log c(t)` (exact for this height law).
    pub fn height_rate(&self, t: f64) -> Result<f64> {
        let c = self.thickness(t)?;
        Ok(-self.circulation / (4.0 * PI * self.length) * c.ln())
    }
}

/// A time slice of the ring: thickness, height and core center, valid
/// only while the core is thin (`c < L/4`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RingState {
    pub t: f64,
    pub c: f64,
    pub h: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub gamma: f64,
    pub nu_tur: f64,
}

impl RingState {
    pub fn new(params: &RingParams, t: f64) -> Result<Self> {
        let c = params.thickness(t)?;
        let limit = params.length / 4.0;
        if c >= limit {
            return Err(Error::OutsideValidityWindow { t, c, limit });
        }
        Ok(RingState {
            t,
            c,
            h: params.height(t)?,
            length: params.length,
            gamma: params.circulation,
            nu_tur: params.nu_tur,
        })
    }

    pub fn center(&self) -> HalfPlanePoint {
        HalfPlanePoint {
            r: self.length,
            z: self.h,
        }
    }
}

/// Ring geometry bundled with its vorticity profile.
#[derive(Debug, Clone)]
pub struct Ring {
    params: RingParams,
    profile: VorticityProfile,
}

impl Ring {
    pub fn new(params: RingParams, profile: VorticityProfile) -> Self {
        Ring { params, profile }
    }

    pub fn params(&self) -> &RingParams {
        &self.params
    }

    pub fn profile(&self) -> &VorticityProfile {
        &self.profile
    }

    pub fn state(&self, t: f64) -> Result<RingState> {
        RingState::new(&self.params, t)
    }

    fn check_rho(rho: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid(format!(
                "internal radius must lie in [0, 1], got {rho}"
            )));
        }
        Ok(())
    }

    /// Internal rotation angle `a(t, rho)`. Stored unreduced (it
    /// diverges like `log t`); reduce mod 2 pi only inside
    /// trigonometric evaluations.
    pub fn rotation_angle(&self, t: f64, rho: f64) -> Result<f64> {
        self.params.check_time(t)?;
        Self::check_rho(rho)?;
        Ok(-self.profile.gamma_rho(rho) / (TWO_PI * self.params.nu_tur) * t.ln())
    }

    /// `da/dt = -gamma_rho / (2 pi c^2)`.
    pub fn rotation_angle_rate(&self, t: f64, rho: f64) -> Result<f64> {
        self.params.check_time(t)?;
        Self::check_rho(rho)?;
        Ok(-self.profile.gamma_rho(rho) / (TWO_PI * self.params.nu_tur * t))
    }

    /// The core parametrization `gamma(t, rho, alpha)`; a
    /// diffeomorphism of the unit disk onto the core with Jacobian
    /// `rho c^2`.
    pub fn core_point(&self, t: f64, rho: f64, alpha: f64) -> Result<HalfPlanePoint> {
        let state = self.state(t)?;
        Self::check_rho(rho)?;
        let theta = alpha + self.rotation_angle(t, rho)?;
        let p = state
            .center()
            .translate(Vec2::unit(theta).scale(state.c * rho));
        debug_assert!(p.r > 0.0);
        Ok(p)
    }

    /// Time derivative of the core parametrization at fixed
    /// `(rho, alpha)`:
    /// `i dh/dt + (dc/dt) rho e^{i theta} + i c rho (da/dt) e^{i theta}`.
    pub fn core_point_rate(&self, t: f64, rho: f64, alpha: f64) -> Result<Vec2> {
        let theta = alpha + self.rotation_angle(t, rho)?;
        self.core_point_rate_polar(t, rho, theta)
    }

    /// Same as [`Ring::core_point_rate`] but parametrized by the
    /// geometric angle `theta = alpha + a(t, rho)`, which is what the
    /// position of a point in the core determines directly.
    pub(crate) fn core_point_rate_polar(&self, t: f64, rho: f64, theta: f64) -> Result<Vec2> {
        let state = self.state(t)?;
        let cdot = self.params.thickness_rate(t)?;
        let hdot = self.params.height_rate(t)?;
        let adot = self.rotation_angle_rate(t, rho)?;
        let radial = Vec2::unit(theta);
        Ok(Vec2::new(0.0, hdot)
            + radial.scale(cdot * rho)
            + radial.perp().scale(state.c * rho * adot))
    }

    /// Invert the core parametrization: `Some((rho, alpha))` with
    /// `alpha` in `[0, 2 pi)` for points inside the closed core,
    /// `None` outside.
    pub fn locate(&self, t: f64, zeta: HalfPlanePoint) -> Result<Option<(f64, f64)>> {
        let state = self.state(t)?;
        let w = zeta.sub(state.center());
        let mut rho = w.norm() / state.c;
        // points on the closed core boundary count as inside
        if rho > 1.0 + 4.0 * f64::EPSILON {
            return Ok(None);
        }
        rho = rho.min(1.0);
        if rho == 0.0 {
            return Ok(Some((0.0, 0.0)));
        }
        let alpha = (w.angle() - self.rotation_angle(t, rho)?).rem_euclid(TWO_PI);
        Ok(Some((rho, alpha)))
    }

    /// The vorticity flux `omega_theta`: `varpi(rho)/c^2` inside the
    /// core, zero outside. Its half-plane integral is the circulation
    /// at every time.
    pub fn vorticity(&self, t: f64, zeta: HalfPlanePoint) -> Result<f64> {
        let state = self.state(t)?;
        Ok(self.vorticity_state(&state, zeta))
    }

    #[inline]
    pub(crate) fn vorticity_state(&self, state: &RingState, zeta: HalfPlanePoint) -> f64 {
        let rho = zeta.sub(state.center()).norm() / state.c;
        if rho >= 1.0 {
            0.0
        } else {
            self.profile.eval_inner(rho) / (state.c * state.c)
        }
    }
}
