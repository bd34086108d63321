//! Compact-support right inverse of the divergence on symmetric
//! 2x2 tensors.
//!
//! For a smooth vector field `f` supported on a ball `B(x0, c)` with
//! zero mean and zero angular moment, there is a symmetric tensor
//! `Rf`, supported on the same ball, with `div(Rf) = f` and
//! `sup|Rf| <~ c sup|f|`. The construction mollifies a one-parameter
//! family of dilation kernels; after substituting the dilation
//! parameter and passing to polar coordinates `(eta, psi)` around the
//! evaluation point, each direction only needs three moments of `f`
//! along a single chord:
//!
//! ```text
//!   M_k(psi) = int_0^{smax} s^k f(x - s e(psi)) ds,   k = 0, 1, 2
//! ```
//!
//! and the `eta`-integral couples them to moments of the mollifier
//! and its gradient along the opposite chord. The `1/|x - y|`
//! singularity of the raw kernels cancels against the polar Jacobian
//! exactly, so fixed Gauss panels suffice and the evaluation is a
//! smooth function of `x` (finite differences across it are safe).

use std::sync::{Arc, OnceLock};

use crate::geometry::{SymTensor2, Vec2};
use crate::numerics::gl16;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Quadrature controls for the operator. The defaults resolve smooth
/// fields to well below the percent-level checks used downstream.
#[derive(Debug, Clone, Copy)]
pub struct AntidivOptions {
    /// directions of the angular sweep
    pub n_psi: usize,
    /// 16-point Gauss panels along each chord integral
    pub n_panels: usize,
    /// compatibility gate, relative to the L1 mass of the field
    pub compat_tol: f64,
}

impl Default for AntidivOptions {
    fn default() -> Self {
        AntidivOptions {
            n_psi: 64,
            n_panels: 3,
            compat_tol: 1e-4,
        }
    }
}

/// Integral metrics of a compactly supported field: mean, angular
/// moment about the support center, and L1 mass.
#[derive(Debug, Clone, Copy)]
pub struct FieldMoments {
    pub mean: Vec2,
    pub angular_moment: f64,
    pub l1: f64,
}

/// A symmetric tensor field supported on a ball; evaluation is pure
/// and returns a structural zero outside the closed ball.
#[derive(Clone)]
pub struct SymTensorField {
    center: Vec2,
    radius: f64,
    eval: Arc<dyn Fn(Vec2) -> SymTensor2 + Send + Sync>,
}

impl std::fmt::Debug for SymTensorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymTensorField")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .finish()
    }
}

impl SymTensorField {
    pub fn new(
        center: Vec2,
        radius: f64,
        eval: Arc<dyn Fn(Vec2) -> SymTensor2 + Send + Sync>,
    ) -> Self {
        SymTensorField {
            center,
            radius,
            eval,
        }
    }

    pub fn zero(center: Vec2, radius: f64) -> Self {
        Self::new(center, radius, Arc::new(|_| SymTensor2::ZERO))
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, p: Vec2) -> SymTensor2 {
        if (p - self.center).norm() >= self.radius {
            return SymTensor2::ZERO;
        }
        (self.eval)(p)
    }

    /// Map the values of this field pointwise.
    pub fn map(
        &self,
        g: impl Fn(Vec2, SymTensor2) -> SymTensor2 + Send + Sync + 'static,
    ) -> SymTensorField {
        let inner = self.clone();
        SymTensorField::new(
            self.center,
            self.radius,
            Arc::new(move |p| g(p, inner.eval(p))),
        )
    }
}

/// Normalization of the standard bump `exp(-1/(1-|u|^2))` on the unit
/// disk.
fn unit_bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let mut f = |r: f64| {
            let u2 = r * r;
            if u2 >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - u2)).exp() * TWO_PI * r
            }
        };
        crate::numerics::integrate(&mut f, 0.0, 1.0, 1e-14, 0.0, "bump mass")
            .expect("bump normalization")
    })
}

/// Unit-mass mollifier on `B(center, radius)` with
/// `sup|D^j phi| <~ radius^{-(2+j)}`.
#[derive(Debug, Clone, Copy)]
struct Mollifier {
    center: Vec2,
    radius: f64,
    norm: f64,
}

impl Mollifier {
    fn new(center: Vec2, radius: f64) -> Self {
        Mollifier {
            center,
            radius,
            norm: unit_bump_mass() * radius * radius,
        }
    }

    #[inline]
    fn value(&self, p: Vec2) -> f64 {
        let u = (p - self.center).scale(1.0 / self.radius);
        let u2 = u.norm_sq();
        if u2 >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u2)).exp() / self.norm
        }
    }

    #[inline]
    fn grad(&self, p: Vec2) -> Vec2 {
        let u = (p - self.center).scale(1.0 / self.radius);
        let u2 = u.norm_sq();
        if u2 >= 1.0 {
            return Vec2::ZERO;
        }
        let g = (-1.0 / (1.0 - u2)).exp() / self.norm;
        let d = 1.0 - u2;
        u.scale(-2.0 * g / (self.radius * d * d))
    }
}

/// Exit parameter of the ray `x + s d`, `|d| = 1`, from the ball
/// `B(center, radius)`; `x` must lie inside.
#[inline]
fn ray_exit(x: Vec2, d: Vec2, center: Vec2, radius: f64) -> f64 {
    let w = x - center;
    let b = w.dot(d);
    let disc = b * b - w.norm_sq() + radius * radius;
    -b + disc.max(0.0).sqrt()
}

/// Mean, angular moment and L1 mass of `f` over `B(center, radius)`
/// by a fixed polar rule.
pub fn field_moments(
    f: &(dyn Fn(Vec2) -> Vec2 + Sync),
    center: Vec2,
    radius: f64,
) -> FieldMoments {
    let n_beta = 96;
    let mut mean = Vec2::ZERO;
    let mut moment = 0.0;
    let mut l1 = 0.0;
    for j in 0..n_beta {
        let beta = TWO_PI * (j as f64 + 0.5) / n_beta as f64;
        let e = Vec2::unit(beta);
        for k in 0..3 {
            let (a, b) = (radius * k as f64 / 3.0, radius * (k as f64 + 1.0) / 3.0);
            for (tau, w) in gl16(a, b) {
                let p = center + e.scale(tau);
                let v = f(p);
                let wtau = w * tau * TWO_PI / n_beta as f64;
                mean = mean + v.scale(wtau);
                moment += v.dot((p - center).perp()) * wtau;
                l1 += v.norm() * wtau;
            }
        }
    }
    FieldMoments {
        mean,
        angular_moment: moment,
        l1,
    }
}

/// Build the antidivergence of `f`. The compatibility conditions are
/// verified first (against `moments` when the caller has already
/// computed them by its own quadrature) and violation is an error
/// carrying both residuals; the operator's output would not solve the
/// equation otherwise.
pub fn antidivergence(
    f: Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>,
    center: Vec2,
    radius: f64,
    moments: Option<FieldMoments>,
    opts: AntidivOptions,
) -> Result<SymTensorField> {
    if !(radius > 0.0) {
        return Err(Error::invalid("support radius must be positive"));
    }
    let m = moments.unwrap_or_else(|| field_moments(f.as_ref(), center, radius));
    if m.l1 > 0.0 {
        let tol = opts.compat_tol * m.l1;
        if m.mean.norm() > tol || m.angular_moment.abs() > tol * radius {
            return Err(Error::Incompatible {
                mean_residual: m.mean.norm() / m.l1,
                moment_residual: m.angular_moment.abs() / (m.l1 * radius),
                tolerance: opts.compat_tol,
            });
        }
    }

    let phi = Mollifier::new(center, radius);
    let eval = move |x: Vec2| -> SymTensor2 {
        let mut acc = SymTensor2::ZERO;
        let dpsi = TWO_PI / opts.n_psi as f64;
        for i in 0..opts.n_psi {
            let psi = (i as f64 + 0.5) * dpsi;
            let e = Vec2::unit(psi);

            // chord moments of f backwards along -e
            let smax = ray_exit(x, -e, center, radius);
            let mut m0 = Vec2::ZERO;
            let mut m1 = Vec2::ZERO;
            let mut m2 = Vec2::ZERO;
            for k in 0..opts.n_panels {
                let a = smax * k as f64 / opts.n_panels as f64;
                let b = smax * (k as f64 + 1.0) / opts.n_panels as f64;
                for (s, w) in gl16(a, b) {
                    let v = f(x - e.scale(s)).scale(w);
                    m0 = m0 + v;
                    m1 = m1 + v.scale(s);
                    m2 = m2 + v.scale(s * s);
                }
            }

            // mollifier moments forwards along +e
            let tmax = ray_exit(x, e, center, radius);
            let mut p = [0.0f64; 3];
            let mut q = [Vec2::ZERO; 3];
            for k in 0..opts.n_panels {
                let a = tmax * k as f64 / opts.n_panels as f64;
                let b = tmax * (k as f64 + 1.0) / opts.n_panels as f64;
                for (eta, w) in gl16(a, b) {
                    let y = x + e.scale(eta);
                    let pv = phi.value(y) * w;
                    let gv = phi.grad(y).scale(w);
                    let mut ek = 1.0;
                    for kk in 0..3 {
                        p[kk] += pv * ek;
                        q[kk] = q[kk] + gv.scale(ek);
                        ek *= eta;
                    }
                }
            }

            // assemble: phi-weighted first moments plus
            // gradient-weighted second moments
            let b_vec = m0.scale(p[1]) + m1.scale(p[0]);
            let s0 = q[0].dot(e);
            let s1 = q[1].dot(e);
            let s2 = q[2].dot(e);
            let d_vec = (m0.scale(s2) + m1.scale(2.0 * s1) + m2.scale(s0)).scale(0.5);
            let qscal = q[2].dot(m0) + 2.0 * q[1].dot(m1) + q[0].dot(m2);

            let bd = b_vec + d_vec;
            acc = acc.add(
                SymTensor2::new(
                    2.0 * e.r * bd.r - qscal * e.r * e.r,
                    e.r * bd.z + e.z * bd.r - qscal * e.r * e.z,
                    2.0 * e.z * bd.z - qscal * e.z * e.z,
                )
                .scale(dpsi),
            );
        }
        acc
    };

    Ok(SymTensorField::new(center, radius, Arc::new(eval)))
}
