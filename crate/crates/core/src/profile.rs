//! The radial vorticity density `varpi(rho)` carried by the core.
//!
//! A profile is admissible when it is continuous, supported on `(0, 1)`
//! and satisfies the two moment constraints
//!
//! ```text
//!   2*pi * int_0^1 varpi(rho) rho   d rho = gamma      (flux)
//!          int_0^1 varpi(rho) rho^3 d rho = 0          (third moment)
//! ```
//!
//! The built-in family is `gamma * c1 * rho(1-rho) * (1 - c2*log(e rho))`
//! with `(c1, c2)` solved from the constraints; an arbitrary continuous
//! density can be supplied instead and is re-projected onto the
//! constraints by adjusting the same two linear coefficients.

use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::numerics::{adaptive_qk, graded_breaks};
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `x * ln(x)` continued by 0 at the origin. Values below 1e-300 are
/// treated as 0 to avoid spurious non-finite intermediates.
#[inline]
fn x_ln_x(x: f64) -> f64 {
    if x < 1e-300 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Basis densities of the two-parameter correction family.
#[inline]
fn basis1(rho: f64) -> f64 {
    rho * (1.0 - rho)
}

/// `rho (1-rho) log(e rho)`, evaluated stably near the origin.
#[inline]
fn basis2(rho: f64) -> f64 {
    (1.0 - rho) * (rho + x_ln_x(rho))
}

type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A solved vorticity density. Immutable after construction; all
/// evaluations are pure and safe to share across threads.
#[derive(Clone)]
pub struct VorticityProfile {
    strength: f64,
    /// Coefficients of `basis1` and `basis2` in the correction.
    lin: [f64; 2],
    base: Option<Density>,
}

impl fmt::Debug for VorticityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VorticityProfile")
            .field("strength", &self.strength)
            .field("lin", &self.lin)
            .field("custom_base", &self.base.is_some())
            .finish()
    }
}

impl VorticityProfile {
    /// Solve the built-in family for a given circulation.
    pub fn solve(strength: f64) -> Result<Self> {
        Self::solve_inner(strength, None)
    }

    /// Re-project a user-supplied continuous density onto the two
    /// moment constraints. `base` is evaluated on `[0, 1]` only and
    /// must vanish at both endpoints.
    pub fn solve_with_base(
        strength: f64,
        base: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let b0 = base(0.0);
        let b1 = base(1.0);
        if b0.abs() > 1e-9 || b1.abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "base density must vanish at 0 and 1 (got {b0:e}, {b1:e})"
            )));
        }
        Self::solve_inner(strength, Some(Arc::new(base)))
    }

    fn solve_inner(strength: f64, base: Option<Density>) -> Result<Self> {
        if strength == 0.0 || !strength.is_finite() {
            return Err(Error::invalid("circulation must be finite and nonzero"));
        }
        // weighted moments of the two basis densities and the base
        let m = |f: &dyn Fn(f64) -> f64, k: i32| -> Result<f64> {
            let mut g = |rho: f64| f(rho) * rho.powi(k);
            adaptive_qk(
                &mut g,
                &graded_breaks(0.0, 1.0, 1e-10),
                1e-14,
                1e-16,
                400,
                "profile basis moment",
            )
        };
        let a11 = m(&basis1, 1)?;
        let a12 = m(&basis2, 1)?;
        let a21 = m(&basis1, 3)?;
        let a22 = m(&basis2, 3)?;
        let (t1, t3) = match &base {
            Some(b) => {
                let b = b.clone();
                let bf = move |rho: f64| b(rho);
                (
                    strength / TWO_PI - m(&bf, 1)?,
                    -m(&bf, 3)?,
                )
            }
            None => (strength / TWO_PI, 0.0),
        };
        let det = a11 * a22 - a12 * a21;
        assert!(
            det.abs() > 1e-6,
            "moment system for the profile family is singular (det = {det:e})"
        );
        let lin = [
            (t1 * a22 - t3 * a12) / det,
            (t3 * a11 - t1 * a21) / det,
        ];
        Ok(VorticityProfile {
            strength,
            lin,
            base,
        })
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// The `(c1, c2)` parameters of the density family, related to the
    /// linear coefficients by `lin = (gamma c1, -gamma c1 c2)`.
    pub fn family_coeffs(&self) -> (f64, f64) {
        let c1 = self.lin[0] / self.strength;
        let c2 = if self.lin[0] != 0.0 {
            -self.lin[1] / self.lin[0]
        } else {
            0.0
        };
        (c1, c2)
    }

    pub fn has_custom_base(&self) -> bool {
        self.base.is_some()
    }

    /// `varpi(rho)`; zero for `rho >= 1`, continuous on `[0, inf)`.
    pub fn eval(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 || !rho.is_finite() {
            return Err(Error::invalid(format!("radius must be >= 0, got {rho}")));
        }
        Ok(self.eval_inner(rho))
    }

    #[inline]
    pub(crate) fn eval_inner(&self, rho: f64) -> f64 {
        if rho <= 0.0 || rho >= 1.0 {
            return 0.0;
        }
        let mut v = self.lin[0] * basis1(rho) + self.lin[1] * basis2(rho);
        if let Some(b) = &self.base {
            v += b(rho);
        }
        v
    }

    /// `int_0^1 varpi(rho) rho^k d rho` to absolute accuracy about
    /// `1e-12 * |gamma|`.
    pub fn moment(&self, k: u32) -> f64 {
        let mut f = |rho: f64| self.eval_inner(rho) * rho.powi(k as i32);
        adaptive_qk(
            &mut f,
            &graded_breaks(0.0, 1.0, 1e-10),
            1e-13,
            1e-13 * self.strength.abs(),
            400,
            "profile moment",
        )
        .expect("moment quadrature of a continuous density")
    }

    /// Layerwise circulation `2*pi * int_0^1 varpi(rho*s) s ds`,
    /// driving the internal rotation. Continuous on `[0, 1]` with
    /// value 0 at the center and `gamma` at the edge.
    pub fn gamma_rho(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let mut f = |s: f64| self.eval_inner(rho * s) * s;
        TWO_PI
            * adaptive_qk(
                &mut f,
                &graded_breaks(0.0, 1.0, 1e-10),
                1e-12,
                1e-14,
                400,
                "layerwise circulation",
            )
            .expect("layerwise circulation quadrature")
    }

    /// Cumulative flux `int_0^rho varpi(s) s ds`, so that
    /// `gamma_rho = 2 pi flux / rho^2`.
    pub fn cumulative_flux(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let mut f = |s: f64| self.eval_inner(s) * s;
        adaptive_qk(
            &mut f,
            &graded_breaks(0.0, rho, 1e-10 * rho),
            1e-12,
            1e-14,
            400,
            "cumulative flux",
        )
        .expect("cumulative flux quadrature")
    }

    /// The rotation-weighted third moment
    /// `int_0^1 varpi(rho) rho * flux(rho) d rho` with
    /// `flux(rho) = int_0^rho varpi s ds`. For every admissible
    /// profile this equals `gamma^2 / (8 pi^2)` regardless of the
    /// density shape.
    pub fn rotation_energy_integral(&self) -> f64 {
        let mut f = |rho: f64| self.eval_inner(rho) * rho * self.cumulative_flux(rho);
        adaptive_qk(
            &mut f,
            &graded_breaks(0.0, 1.0, 1e-8),
            1e-11,
            1e-13 * self.strength * self.strength,
            400,
            "rotation energy integral",
        )
        .expect("rotation energy quadrature")
    }

    pub fn rotation_speed(&self) -> RotationSpeed {
        RotationSpeed {
            profile: self.clone(),
        }
    }
}

/// The angular circulation density `gamma_rho` as a standalone
/// evaluator.
#[derive(Debug, Clone)]
pub struct RotationSpeed {
    profile: VorticityProfile,
}

impl RotationSpeed {
    pub fn eval(&self, rho: f64) -> f64 {
        self.profile.gamma_rho(rho)
    }
}

#[derive(Serialize, Deserialize)]
struct ProfileRecord {
    gamma: f64,
    c1: f64,
    c2: f64,
}

impl Serialize for VorticityProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.base.is_some() {
            return Err(S::Error::custom(
                "profiles with a custom base density have no closed-form record",
            ));
        }
        let (c1, c2) = self.family_coeffs();
        ProfileRecord {
            gamma: self.strength,
            c1,
            c2,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VorticityProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rec = ProfileRecord::deserialize(deserializer)?;
        if rec.gamma == 0.0 {
            return Err(D::Error::custom("profile record with zero circulation"));
        }
        let lin = [rec.gamma * rec.c1, -rec.gamma * rec.c1 * rec.c2];
        Ok(VorticityProfile {
            strength: rec.gamma,
            lin,
            base: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PI: f64 = std::f64::consts::PI;

    /// Brute-force Riemann midpoint quadrature, the independent
    /// oracle for the closed-form coefficient values below.
    fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = crate::numerics::CompensatedSum::new();
        for i in 0..n {
            acc.add(f(a + (i as f64 + 0.5) * h));
        }
        acc.value() * h
    }

    #[test]
    fn basis_moments_match_closed_forms() {
        // oracle for the frozen family coefficients: the four basis
        // moments evaluate to 1/12, 5/144, 1/30 and 19/900
        let m = |f: &dyn Fn(f64) -> f64, k: i32| {
            riemann(|rho| f(rho) * rho.powi(k), 0.0, 1.0, 2_000_000)
        };
        assert_relative_eq!(m(&basis1, 1), 1.0 / 12.0, max_relative = 1e-10);
        assert_relative_eq!(m(&basis2, 1), 5.0 / 144.0, max_relative = 1e-9);
        assert_relative_eq!(m(&basis1, 3), 1.0 / 30.0, max_relative = 1e-10);
        assert_relative_eq!(m(&basis2, 3), 19.0 / 900.0, max_relative = 1e-9);
    }

    #[test]
    fn solved_coefficients_match_frozen_values() {
        // c2 = (1/30)/(19/900) = 30/19 and c1 = 228/(13 pi), from the
        // basis moments above
        let p = VorticityProfile::solve(1.0).unwrap();
        let (c1, c2) = p.family_coeffs();
        assert_relative_eq!(c2, 30.0 / 19.0, max_relative = 1e-12);
        assert_relative_eq!(c1, 228.0 / (13.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn moments_satisfy_constraints() {
        for gamma in [1.0, -2.0, 3.0] {
            let p = VorticityProfile::solve(gamma).unwrap();
            assert_relative_eq!(
                TWO_PI * p.moment(1),
                gamma,
                max_relative = 1e-12,
                epsilon = 1e-13
            );
            assert!(p.moment(3).abs() <= 1e-12 * gamma.abs());
        }
    }

    #[test]
    fn scaling_in_strength_is_linear() {
        let p1 = VorticityProfile::solve(1.0).unwrap();
        let p2 = VorticityProfile::solve(-2.0).unwrap();
        let (_, c2a) = p1.family_coeffs();
        let (_, c2b) = p2.family_coeffs();
        assert_relative_eq!(c2a, c2b, epsilon = 1e-13);
        for rho in [0.1, 0.3, 0.5, 0.9] {
            assert_relative_eq!(
                p2.eval(rho).unwrap(),
                -2.0 * p1.eval(rho).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn eval_support_and_continuity() {
        let p = VorticityProfile::solve(1.0).unwrap();
        assert_eq!(p.eval(1.0).unwrap(), 0.0);
        assert_eq!(p.eval(2.5).unwrap(), 0.0);
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
        // continuity at both support endpoints
        assert!(p.eval(1e-9).unwrap().abs() < 1e-6);
        assert!(p.eval(1.0 - 1e-9).unwrap().abs() < 1e-6);
        assert!(p.eval(-0.1).is_err());
        // frozen value at rho = 1/2: c1/4 * (1 - c2 log(e/2))
        let (c1, c2) = p.family_coeffs();
        let expect = c1 * 0.25 * (1.0 - c2 * (std::f64::consts::E / 2.0).ln());
        assert_relative_eq!(p.eval(0.5).unwrap(), expect, max_relative = 1e-13);
    }

    #[test]
    fn gamma_rho_endpoints_and_substitution_form() {
        let p = VorticityProfile::solve(1.0).unwrap();
        assert_eq!(p.gamma_rho(0.0), 0.0);
        assert_relative_eq!(p.gamma_rho(1.0), 1.0, max_relative = 1e-11);
        // against the cumulative-flux form 2 pi flux / rho^2
        for rho in [0.15, 0.4, 0.7, 0.95] {
            assert_relative_eq!(
                p.gamma_rho(rho),
                TWO_PI * p.cumulative_flux(rho) / (rho * rho),
                max_relative = 1e-10
            );
        }
        // brute-force oracle at rho = 1/2
        let brute = TWO_PI
            * riemann(
                |s| p.eval_inner(0.5 * s) * s,
                0.0,
                1.0,
                1_000_000,
            );
        assert_relative_eq!(p.gamma_rho(0.5), brute, max_relative = 1e-8);
    }

    #[test]
    fn rotation_energy_is_profile_independent() {
        let target = 1.0 / (8.0 * PI * PI);
        let p0 = VorticityProfile::solve(1.0).unwrap();
        assert_relative_eq!(p0.rotation_energy_integral(), target, max_relative = 1e-9);
        // quadratic in the circulation
        let p2 = VorticityProfile::solve(2.0).unwrap();
        assert_relative_eq!(
            p2.rotation_energy_integral(),
            4.0 * target,
            max_relative = 1e-9
        );
        // perturbed admissible profiles keep the same value
        let pa =
            VorticityProfile::solve_with_base(1.0, |rho| (PI * rho).sin().powi(2) * (1.0 - rho))
                .unwrap();
        let pb = VorticityProfile::solve_with_base(1.0, |rho| {
            0.7 * rho * (1.0 - rho) * (2.0 * PI * rho).cos()
        })
        .unwrap();
        for p in [&pa, &pb] {
            assert_relative_eq!(
                TWO_PI * p.moment(1),
                1.0,
                max_relative = 1e-11,
                epsilon = 1e-12
            );
            assert!(p.moment(3).abs() < 1e-11);
            assert_relative_eq!(p.rotation_energy_integral(), target, max_relative = 1e-8);
        }
    }

    #[test]
    fn record_round_trips() {
        let p = VorticityProfile::solve(-1.5).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"gamma\"") && json.contains("\"c1\"") && json.contains("\"c2\""));
        let q: VorticityProfile = serde_json::from_str(&json).unwrap();
        for rho in [0.2, 0.5, 0.8] {
            assert_relative_eq!(
                p.eval(rho).unwrap(),
                q.eval(rho).unwrap(),
                max_relative = 1e-14
            );
        }
        let custom = VorticityProfile::solve_with_base(1.0, |rho| rho * (1.0 - rho)).unwrap();
        assert!(serde_json::to_string(&custom).is_err());
    }
}
