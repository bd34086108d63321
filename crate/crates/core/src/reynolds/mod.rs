//! Forcing assembly, pressure corrector and the Reynolds stress.
//!
//! The stress measures the discrepancy between the prescribed core
//! evolution and the induced velocity:
//!
//! ```text
//!   F = r ( omega_theta (d gamma/dt - v)^perp + grad q1 )
//!   -div(r R) = F,   R = -(1/r) * antidivergence(F)
//! ```
//!
//! The smooth pressure corrector `q1`, supported on the core, is fixed
//! by two time-dependent coefficients chosen so that `F` has zero mean
//! and zero angular moment about the core center; those are exactly
//! the compatibility conditions of the compact-support antidivergence.

mod antidiv;

pub use antidiv::{antidivergence, field_moments, AntidivOptions, FieldMoments, SymTensorField};

use std::sync::Arc;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::geometry::{HalfPlanePoint, Vec2};
#[cfg(test)]
use crate::geometry::SymTensor2;
use crate::numerics::gl16;
use crate::ring::RingState;
use crate::{Error, Result, Subsolution};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

/// Normalizations of the polynomial bumps `kappa_j rho^2 (1-rho)^2`
/// carrying the pressure corrector: `2 pi int phi_j rho^j d rho = 1`.
pub const KAPPA_1: f64 = 30.0 / PI;
pub const KAPPA_2: f64 = 105.0 / (2.0 * PI);

#[inline]
fn bump(rho: f64) -> f64 {
    if !(0.0..1.0).contains(&rho) {
        return 0.0;
    }
    let d = rho * (1.0 - rho);
    d * d
}

#[inline]
fn bump_prime(rho: f64) -> f64 {
    if !(0.0..1.0).contains(&rho) {
        return 0.0;
    }
    2.0 * rho * (1.0 - rho) * (1.0 - 2.0 * rho)
}

/// The two time-dependent coefficients of the pressure corrector
/// `q1 = (c1 phi_1(rho) + c2 phi_2(rho) sin(alpha + a)) / c^2`,
/// together with the core integrals that produced them.
#[derive(Debug, Clone, Copy)]
pub struct PressureCorrector {
    pub t: f64,
    pub c1: f64,
    pub c2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// mean of `r omega (dgamma/dt - v)^perp` over the half-plane
    pub a1: Vec2,
    /// angular moment of the same field about the core center
    pub a2: f64,
}

/// Resolution of the tabulated forcing field.
#[derive(Debug, Clone, Copy)]
pub struct ForcingResolution {
    pub n_rho: usize,
    pub n_beta: usize,
    /// relative tolerance of the velocity evaluations behind the table
    pub velocity_tol: f64,
    /// run the independent compatibility quadrature (pointwise
    /// assembly, no interpolation) and store its residuals
    pub compat_check: bool,
}

impl Default for ForcingResolution {
    fn default() -> Self {
        ForcingResolution {
            n_rho: 64,
            n_beta: 128,
            velocity_tol: 1e-6,
            compat_check: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForcingDiagnostics {
    pub a1: Vec2,
    pub a2: f64,
    pub c1: f64,
    pub c2: f64,
    pub compat_mean: Vec2,
    pub compat_moment: f64,
    pub l1: f64,
    pub sup: f64,
}

impl Serialize for ForcingDiagnostics {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ForcingDiagnostics", 6)?;
        st.serialize_field("A1", &[self.a1.r, self.a1.z])?;
        st.serialize_field("A2", &self.a2)?;
        st.serialize_field("c1", &self.c1)?;
        st.serialize_field("c2", &self.c2)?;
        st.serialize_field("compat_mean", &[self.compat_mean.r, self.compat_mean.z])?;
        st.serialize_field("compat_moment", &self.compat_moment)?;
        st.end()
    }
}

/// Compatibility integrals of the assembled forcing: its mean, its
/// angular moment about the core center, and its L1 mass.
#[derive(Debug, Clone, Copy)]
pub struct ForcingCompat {
    pub mean: Vec2,
    pub moment: f64,
    pub l1: f64,
}

/// The forcing `F`, tabulated on an internal polar grid over the core
/// and interpolated bilinearly; identically zero outside the core.
#[derive(Debug, Clone)]
pub struct ForcingField {
    pub t: f64,
    center: HalfPlanePoint,
    radius: f64,
    n_rho: usize,
    n_beta: usize,
    values: Vec<Vec2>,
    diagnostics: ForcingDiagnostics,
}

impl ForcingField {
    pub fn center(&self) -> HalfPlanePoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diagnostics(&self) -> &ForcingDiagnostics {
        &self.diagnostics
    }

    pub fn sup_norm(&self) -> f64 {
        self.diagnostics.sup
    }

    #[inline]
    fn node(&self, i: usize, j: usize) -> Vec2 {
        self.values[i * self.n_beta + j % self.n_beta]
    }

    /// Bilinear interpolation in `(rho, beta)`, periodic in `beta`.
    pub fn eval(&self, p: HalfPlanePoint) -> Vec2 {
        let w = p.sub(self.center);
        let rho = w.norm() / self.radius;
        if rho >= 1.0 {
            return Vec2::ZERO;
        }
        let beta = w.angle().rem_euclid(TWO_PI);
        let u = rho * self.n_rho as f64;
        let i = (u as usize).min(self.n_rho - 1);
        let fu = u - i as f64;
        let v = beta / TWO_PI * self.n_beta as f64;
        let j = (v as usize).min(self.n_beta - 1);
        let fv = v - j as f64;
        let a = self.node(i, j).scale((1.0 - fu) * (1.0 - fv));
        let b = self.node(i + 1, j).scale(fu * (1.0 - fv));
        let c = self.node(i, j + 1).scale((1.0 - fu) * fv);
        let d = self.node(i + 1, j + 1).scale(fu * fv);
        a + b + c + d
    }

    fn eval_xy(&self, p: Vec2) -> Vec2 {
        self.eval(HalfPlanePoint { r: p.r, z: p.z })
    }
}

impl Subsolution {
    /// `d gamma/dt - v` at a point of the core parametrized by
    /// `(rho, alpha)`. After the height and rotation laws cancel the
    /// kernel's leading terms this is an `O(1)` field plus the
    /// expansion term `(dc/dt) rho e^{i theta}`.
    pub fn discrepancy(&self, t: f64, rho: f64, alpha: f64) -> Result<Vec2> {
        let rate = self.ring().core_point_rate(t, rho, alpha)?;
        let v = self.velocity_on_ring(t, rho, alpha)?;
        Ok(rate - v.total())
    }

    /// Discrepancy expressed through the geometric angle
    /// `theta = alpha + a(t, rho)`, which is what a half-plane
    /// position determines directly.
    fn discrepancy_polar(
        &self,
        state: &RingState,
        rho: f64,
        theta: f64,
        vel_tol: f64,
    ) -> Result<Vec2> {
        let rate = self.ring().core_point_rate_polar(state.t, rho, theta)?;
        let p = state
            .center()
            .translate(Vec2::unit(theta).scale(state.c * rho));
        let v = self.velocity_with_tol(state.t, p, vel_tol)?;
        Ok(rate - v.total())
    }

    /// Solve the two compatibility conditions for the corrector
    /// coefficients: `c1` cancels the mean of the forcing (the mean of
    /// the vorticity term is radial up to quadrature error, which is
    /// reported through the diagnostics) and `c2` cancels its angular
    /// moment.
    pub fn pressure_corrector(&self, t: f64) -> Result<PressureCorrector> {
        self.pressure_corrector_with_tol(t, self.quad_tol().min(1e-7))
    }

    /// Same, with an explicit tolerance for the velocity evaluations
    /// behind the core integrals.
    pub fn pressure_corrector_with_tol(&self, t: f64, vel_tol: f64) -> Result<PressureCorrector> {
        let state = self.ring().state(t)?;
        let profile = self.profile();

        // fixed-structure quadrature over the core: Gauss panels in
        // rho, midpoint rule in the angle (the integrand is smooth and
        // periodic there)
        let rho_panels = [0.0, 0.15, 0.55, 1.0];
        let n_beta = 28;
        let mut rho_nodes = Vec::new();
        for w in rho_panels.windows(2) {
            rho_nodes.extend(gl16(w[0], w[1]));
        }
        let terms: Vec<(Vec2, f64)> = rho_nodes
            .par_iter()
            .map(|&(rho, wr)| {
                let varpi = profile.eval_inner(rho);
                if varpi == 0.0 {
                    return Ok((Vec2::ZERO, 0.0));
                }
                let mut a1 = Vec2::ZERO;
                let mut a2 = 0.0;
                for j in 0..n_beta {
                    let theta = TWO_PI * (j as f64 + 0.5) / n_beta as f64;
                    let d = self.discrepancy_polar(&state, rho, theta, vel_tol)?;
                    let radial = Vec2::unit(theta);
                    let r = state.length + state.c * rho * radial.r;
                    a1 = a1 + d.perp().scale(r);
                    a2 += d.dot(radial) * r * state.c * rho;
                }
                let w = wr * varpi * rho * TWO_PI / n_beta as f64;
                Ok((a1.scale(w), a2 * w))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut a1 = Vec2::ZERO;
        let mut a2 = 0.0;
        for (v, s) in terms {
            a1 = a1 + v;
            a2 += s;
        }

        Ok(PressureCorrector {
            t,
            c1: a1.r,
            c2: -2.0 * a2 / state.c,
            kappa1: KAPPA_1,
            kappa2: KAPPA_2,
            a1,
            a2,
        })
    }

    /// The pressure corrector value at a half-plane point; supported
    /// exactly on the core disk.
    pub fn q1(&self, corr: &PressureCorrector, zeta: HalfPlanePoint) -> Result<f64> {
        let state = self.ring().state(corr.t)?;
        let w = zeta.sub(state.center());
        let rho = w.norm() / state.c;
        if rho >= 1.0 {
            return Ok(0.0);
        }
        let sin_theta = if w.norm() > 0.0 { w.z / w.norm() } else { 0.0 };
        Ok(
            (corr.c1 * corr.kappa1 * bump(rho) + corr.c2 * corr.kappa2 * bump(rho) * sin_theta)
                / (state.c * state.c),
        )
    }

    /// Analytic gradient of the corrector, via the chain rule through
    /// the core coordinates; zero outside the core and `O(c^{-3})` in
    /// sup norm.
    pub fn grad_q1(&self, corr: &PressureCorrector, zeta: HalfPlanePoint) -> Result<Vec2> {
        let state = self.ring().state(corr.t)?;
        Ok(self.grad_q1_state(corr, &state, zeta))
    }

    fn grad_q1_state(
        &self,
        corr: &PressureCorrector,
        state: &RingState,
        zeta: HalfPlanePoint,
    ) -> Vec2 {
        let w = zeta.sub(state.center());
        let norm = w.norm();
        let rho = norm / state.c;
        if rho >= 1.0 || norm == 0.0 {
            return Vec2::ZERO;
        }
        let rhat = w.scale(1.0 / norm);
        let that = rhat.perp();
        let (sin_t, cos_t) = (rhat.z, rhat.r);
        let radial =
            corr.c1 * corr.kappa1 * bump_prime(rho) + corr.c2 * corr.kappa2 * bump_prime(rho) * sin_t;
        let angular = corr.c2 * corr.kappa2 * (bump(rho) / rho) * cos_t;
        (rhat.scale(radial) + that.scale(angular)).scale(1.0 / (state.c * state.c * state.c))
    }

    /// The forcing at one half-plane point, assembled pointwise from
    /// the vorticity, the discrepancy and the corrector gradient.
    pub fn forcing_at(
        &self,
        corr: &PressureCorrector,
        zeta: HalfPlanePoint,
        vel_tol: f64,
    ) -> Result<Vec2> {
        let state = self.ring().state(corr.t)?;
        self.forcing_at_state(corr, &state, zeta, vel_tol)
    }

    fn forcing_at_state(
        &self,
        corr: &PressureCorrector,
        state: &RingState,
        zeta: HalfPlanePoint,
        vel_tol: f64,
    ) -> Result<Vec2> {
        let w = zeta.sub(state.center());
        let rho = w.norm() / state.c;
        if rho >= 1.0 {
            return Ok(Vec2::ZERO);
        }
        let omega = self.ring().vorticity_state(state, zeta);
        let grad = self.grad_q1_state(corr, state, zeta);
        let vort_term = if omega == 0.0 {
            Vec2::ZERO
        } else {
            let theta = w.angle();
            self.discrepancy_polar(state, rho, theta, vel_tol)?
                .perp()
                .scale(omega)
        };
        Ok((vort_term + grad).scale(zeta.r))
    }

    /// Tabulate the forcing over the core. The compatibility
    /// residuals in the diagnostics come from an independent
    /// pointwise quadrature when `compat_check` is set, otherwise from
    /// the table itself.
    pub fn forcing(&self, corr: &PressureCorrector, res: &ForcingResolution) -> Result<ForcingField> {
        let state = self.ring().state(corr.t)?;
        let (n_rho, n_beta) = (res.n_rho, res.n_beta);
        if n_rho < 4 || n_beta < 8 {
            return Err(Error::invalid("forcing table resolution too small"));
        }

        let values: Vec<Vec2> = (0..=n_rho)
            .into_par_iter()
            .flat_map_iter(|i| (0..n_beta).map(move |j| (i, j)))
            .map(|(i, j)| {
                let rho = i as f64 / n_rho as f64;
                if rho == 0.0 || rho == 1.0 {
                    // the vorticity and both bump factors vanish
                    return Ok(Vec2::ZERO);
                }
                let beta = TWO_PI * j as f64 / n_beta as f64;
                let p = state
                    .center()
                    .translate(Vec2::unit(beta).scale(state.c * rho));
                self.forcing_at_state(corr, &state, p, res.velocity_tol)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut sup: f64 = 0.0;
        for v in &values {
            sup = sup.max(v.norm());
        }

        // table-based integrals (always available, cheap)
        let field = ForcingField {
            t: corr.t,
            center: state.center(),
            radius: state.c,
            n_rho,
            n_beta,
            values,
            diagnostics: ForcingDiagnostics {
                a1: corr.a1,
                a2: corr.a2,
                c1: corr.c1,
                c2: corr.c2,
                compat_mean: Vec2::ZERO,
                compat_moment: 0.0,
                l1: 0.0,
                sup,
            },
        };
        let center_xy = Vec2::new(state.center().r, state.center().z);
        let (mean, moment, l1) = if res.compat_check {
            self.compat_residuals(corr, &state, res.velocity_tol)?
        } else {
            let m = field_moments(&|p| field.eval_xy(p), center_xy, state.c);
            (m.mean, m.angular_moment, m.l1)
        };
        let mut field = field;
        field.diagnostics.compat_mean = mean;
        field.diagnostics.compat_moment = moment;
        field.diagnostics.l1 = l1;
        Ok(field)
    }

    /// Independent quadrature of the assembled forcing's mean, angular
    /// moment and L1 mass (different node structure than the
    /// coefficient solve, no table interpolation).
    pub fn forcing_compatibility(
        &self,
        corr: &PressureCorrector,
        vel_tol: f64,
    ) -> Result<ForcingCompat> {
        let state = self.ring().state(corr.t)?;
        let (mean, moment, l1) = self.compat_residuals(corr, &state, vel_tol)?;
        Ok(ForcingCompat { mean, moment, l1 })
    }

    fn compat_residuals(
        &self,
        corr: &PressureCorrector,
        state: &RingState,
        vel_tol: f64,
    ) -> Result<(Vec2, f64, f64)> {
        let rho_panels = [0.0, 0.3, 0.7, 1.0];
        let n_beta = 40;
        let mut nodes = Vec::new();
        for w in rho_panels.windows(2) {
            nodes.extend(gl16(w[0], w[1]));
        }
        let rows: Vec<(Vec2, f64, f64)> = nodes
            .par_iter()
            .map(|&(rho, wr)| {
                let mut mean = Vec2::ZERO;
                let mut moment = 0.0;
                let mut l1 = 0.0;
                for j in 0..n_beta {
                    let beta = TWO_PI * (j as f64 + 0.5) / n_beta as f64;
                    let p = state
                        .center()
                        .translate(Vec2::unit(beta).scale(state.c * rho));
                    let f = self.forcing_at_state(corr, state, p, vel_tol)?;
                    mean = mean + f;
                    moment += f.dot(p.sub(state.center()).perp());
                    l1 += f.norm();
                }
                // d zeta = c^2 rho d rho d beta
                let w = wr * rho * state.c * state.c * TWO_PI / n_beta as f64;
                Ok((mean.scale(w), moment * w, l1 * w))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut mean = Vec2::ZERO;
        let mut moment = 0.0;
        let mut l1 = 0.0;
        for (m, mo, l) in rows {
            mean = mean + m;
            moment += mo;
            l1 += l;
        }
        Ok((mean, moment, l1))
    }

    /// The Reynolds stress cross-section `R = -(1/r) antidivergence(F)`,
    /// supported on the core ball.
    pub fn reynolds_field(
        &self,
        forcing: &ForcingField,
        opts: AntidivOptions,
    ) -> Result<SymTensorField> {
        let center = Vec2::new(forcing.center.r, forcing.center.z);
        let d = forcing.diagnostics;
        let field = forcing.clone();
        let raw = antidivergence(
            Arc::new(move |p| field.eval_xy(p)),
            center,
            forcing.radius,
            Some(FieldMoments {
                mean: d.compat_mean,
                angular_moment: d.compat_moment,
                l1: d.l1,
            }),
            opts,
        )?;
        Ok(raw.map(|p, t| t.scale(-1.0 / p.r)))
    }

    /// The explicitly computable part of the background Bernoulli
    /// potential (diagnostic only; the forcing never uses it).
    pub fn q00_potential(&self, t: f64, zeta: HalfPlanePoint) -> Result<f64> {
        let state = self.ring().state(t)?;
        let ring = self.ring().clone();
        let f = move |w: HalfPlanePoint| -> f64 {
            let d = zeta.sub(w);
            if d.norm_sq() == 0.0 {
                return 0.0;
            }
            let k = crate::kernels::k_2d(d).expect("nonzero displacement");
            let wv = w.sub(state.center());
            let rho = wv.norm() / state.c;
            let theta = wv.angle();
            let rate = ring
                .core_point_rate_polar(t, rho.min(1.0), theta)
                .expect("valid state");
            -k.dot(rate)
        };
        self.core_weighted_integral(&state, Some(zeta), &f, self.quad_tol().max(1e-9))
    }
}

/// One sample of the meridional-versus-cartesian divergence
/// comparison for a lifted tensor field.
#[derive(Debug, Clone, Copy)]
pub struct LiftCheck {
    pub point: HalfPlanePoint,
    /// cartesian finite-difference divergence of the lifted 3x3
    /// tensor, expressed in the (e_r, e_z) rows at azimuth zero
    pub div3: Vec2,
    /// half-plane form `(1/r) div(r R)` by finite differences
    pub div2: Vec2,
}

impl LiftCheck {
    pub fn mismatch(&self) -> f64 {
        (self.div3 - self.div2).norm()
    }
}

/// Lift a meridional tensor to cylindrical coordinates (zero azimuthal
/// entries) and compare its cartesian divergence against the
/// half-plane expression at the given points.
pub fn verify_axisymmetric_lift(
    field: &SymTensorField,
    points: &[HalfPlanePoint],
    step: f64,
) -> Result<Vec<LiftCheck>> {
    // the lifted tensor at a cartesian point, as the 6 independent
    // components of a symmetric 3x3 matrix
    let lift = |x: [f64; 3]| -> [[f64; 3]; 3] {
        let rt = x[0].hypot(x[1]);
        let t = field.eval(Vec2::new(rt, x[2]));
        let (cr, sr) = (x[0] / rt, x[1] / rt);
        [
            [t.rr * cr * cr, t.rr * cr * sr, t.rz * cr],
            [t.rr * cr * sr, t.rr * sr * sr, t.rz * sr],
            [t.rz * cr, t.rz * sr, t.zz],
        ]
    };
    let mut out = Vec::with_capacity(points.len());
    for &p in points {
        if p.r <= 4.0 * step {
            return Err(Error::invalid(format!(
                "lift check point r = {} too close to the axis for step {step}",
                p.r
            )));
        }
        let x0 = [p.r, 0.0, p.z];
        let mut div3 = [0.0f64; 3];
        for k in 0..3 {
            let mut xp = x0;
            let mut xm = x0;
            xp[k] += step;
            xm[k] -= step;
            let tp = lift(xp);
            let tm = lift(xm);
            for (l, d) in div3.iter_mut().enumerate() {
                *d += (tp[l][k] - tm[l][k]) / (2.0 * step);
            }
        }
        let tv = |r: f64, z: f64| field.eval(Vec2::new(r, z));
        let (pr, mr) = (tv(p.r + step, p.z), tv(p.r - step, p.z));
        let (pz, mz) = (tv(p.r, p.z + step), tv(p.r, p.z - step));
        let div2 = Vec2::new(
            ((p.r + step) * pr.rr - (p.r - step) * mr.rr) / (2.0 * step)
                + p.r * (pz.rz - mz.rz) / (2.0 * step),
            ((p.r + step) * pr.rz - (p.r - step) * mr.rz) / (2.0 * step)
                + p.r * (pz.zz - mz.zz) / (2.0 * step),
        )
        .scale(1.0 / p.r);
        out.push(LiftCheck {
            point: p,
            div3: Vec2::new(div3[0], div3[2]),
            div2,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TensorRow {
    pub r: f64,
    pub z: f64,
    pub rrr: f64,
    pub rrz: f64,
    pub rzz: f64,
}

/// Sample a tensor field on a grid, row-major in `(z, r)`.
pub fn tensor_field_grid(
    field: &SymTensorField,
    grid: &crate::biotsavart::GridSpec,
) -> Result<Vec<TensorRow>> {
    grid.validate()?;
    Ok(grid
        .points()
        .into_par_iter()
        .map(|p| {
            let t = field.eval(Vec2::new(p.r, p.z));
            TensorRow {
                r: p.r,
                z: p.z,
                rrr: t.rr,
                rrz: t.rz,
                rzz: t.zz,
            }
        })
        .collect())
}

pub fn write_tensor_csv<W: std::io::Write>(rows: &[TensorRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "r,z,Rrr,Rrz,Rzz")?;
    for row in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.r, row.z, row.rrr, row.rrz, row.rzz
        )?;
    }
    Ok(())
}
