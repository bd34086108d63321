//! Points and vectors on the meridional half-plane, identified with
//! complex numbers `zeta = r + i z`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point of the half-plane `{r > 0}`. The invariant `r > 0` is
/// enforced by [`HalfPlanePoint::new`]; code that builds points from
/// already-validated geometry may construct the fields directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub r: f64,
    pub z: f64,
}

impl HalfPlanePoint {
    pub fn new(r: f64, z: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() || !z.is_finite() {
            return Err(Error::invalid(format!(
                "half-plane point needs finite r > 0, got ({r}, {z})"
            )));
        }
        Ok(HalfPlanePoint { r, z })
    }

    /// Displacement to another point.
    #[inline]
    pub fn sub(&self, other: HalfPlanePoint) -> Vec2 {
        Vec2 {
            r: self.r - other.r,
            z: self.z - other.z,
        }
    }

    #[inline]
    pub fn translate(&self, v: Vec2) -> HalfPlanePoint {
        HalfPlanePoint {
            r: self.r + v.r,
            z: self.z + v.z,
        }
    }
}

/// A meridional 2-vector `(v_r, v_z)`, also used as a generic planar
/// point in the antidivergence machinery.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub r: f64,
    pub z: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { r: 0.0, z: 0.0 };

    #[inline]
    pub fn new(r: f64, z: f64) -> Self {
        Vec2 { r, z }
    }

    /// Unit vector at angle `theta` from the r-axis.
    #[inline]
    pub fn unit(theta: f64) -> Self {
        Vec2 {
            r: theta.cos(),
            z: theta.sin(),
        }
    }

    #[inline]
    pub fn dot(&self, other: Vec2) -> f64 {
        self.r * other.r + self.z * other.z
    }

    /// Counterclockwise quarter turn: multiplication by `i` under the
    /// complex identification, `(r, z) -> (-z, r)`.
    #[inline]
    pub fn perp(&self) -> Vec2 {
        Vec2 {
            r: -self.z,
            z: self.r,
        }
    }

    /// Complex product of `self` with `e^{i theta}`.
    #[inline]
    pub fn rotate(&self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2 {
            r: self.r * c - self.z * s,
            z: self.r * s + self.z * c,
        }
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.r.hypot(self.z)
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.r * self.r + self.z * self.z
    }

    #[inline]
    pub fn angle(&self) -> f64 {
        self.z.atan2(self.r)
    }

    #[inline]
    pub fn scale(&self, a: f64) -> Vec2 {
        Vec2 {
            r: a * self.r,
            z: a * self.z,
        }
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.r + rhs.r, self.z + rhs.z)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.r - rhs.r, self.z - rhs.z)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        self.scale(rhs)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        self.scale(-1.0)
    }
}

/// A symmetric 2x2 tensor on the half-plane; symmetry is structural
/// (one stored off-diagonal component).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymTensor2 {
    pub rr: f64,
    pub rz: f64,
    pub zz: f64,
}

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2 {
        rr: 0.0,
        rz: 0.0,
        zz: 0.0,
    };

    pub fn new(rr: f64, rz: f64, zz: f64) -> Self {
        SymTensor2 { rr, rz, zz }
    }

    #[inline]
    pub fn add(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.rr + o.rr, self.rz + o.rz, self.zz + o.zz)
    }

    #[inline]
    pub fn scale(self, a: f64) -> SymTensor2 {
        SymTensor2::new(a * self.rr, a * self.rz, a * self.zz)
    }

    pub fn sup_norm(&self) -> f64 {
        self.rr.abs().max(self.rz.abs()).max(self.zz.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perp_is_quarter_turn() {
        let v = Vec2::new(2.0, 3.0);
        assert_eq!(v.perp(), Vec2::new(-3.0, 2.0));
        assert_eq!(v.perp().dot(v), 0.0);
    }

    #[test]
    fn rotate_matches_complex_multiplication() {
        let v = Vec2::new(1.0, 0.0).rotate(std::f64::consts::FRAC_PI_2);
        assert!((v.r).abs() < 1e-15 && (v.z - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_plane_rejects_axis() {
        assert!(HalfPlanePoint::new(0.0, 1.0).is_err());
        assert!(HalfPlanePoint::new(-1.0, 0.0).is_err());
        assert!(HalfPlanePoint::new(1e-12, 0.0).is_ok());
    }
}
