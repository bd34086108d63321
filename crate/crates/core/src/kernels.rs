//! Scalar kernels of the axisymmetric Biot-Savart law and their
//! assembly.
//!
//! The meridional velocity induced by an azimuthal vorticity sheet is
//! an integral against
//!
//! ```text
//!   K_ax(zeta, zeta') = i/(2 pi r) * ( sqrt(r'/r) H(s) - zbar G(s) )
//!   zbar = (zeta - zeta') / sqrt(r r'),   s = |zbar|^2
//! ```
//!
//! with the azimuthal-average kernels
//!
//! ```text
//!   G(s) = int_0^pi cos(phi)     / (2(1-cos phi) + s)^{3/2} d phi
//!   H(s) = int_0^pi (1-cos phi)  / (2(1-cos phi) + s)^{3/2} d phi
//! ```
//!
//! `G` blows up like `1/s` and `H` like `-log(s)/4` as `s -> 0`; both
//! decay for large `s`. Since one velocity evaluation consumes
//! thousands of kernel values, `(s -> G, H)` is cached on a log-spaced
//! grid with monotone cubic Hermite interpolation; tables are built
//! once per tolerance bucket and shared.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::geometry::{HalfPlanePoint, Vec2};
use crate::numerics::{adaptive_qk, graded_breaks};
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

fn check_positive(s: f64, what: &str) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!("{what} requires s > 0, got {s}")));
    }
    Ok(())
}


/// `1 - cos(phi)` evaluated as `2 sin^2(phi/2)`; the naive form loses
/// half the significand near `phi = 0`, exactly where the integrands
/// peak.
#[inline]
fn one_minus_cos(phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    2.0 * s * s
}

/// Panel structure for the kernel integrands: graded toward `phi = 0`
/// where the integrand concentrates on a scale `sqrt(s)`.
fn kernel_breaks(s: f64) -> Vec<f64> {
    graded_breaks(0.0, PI, s.sqrt().min(PI) / 8.0)
}

/// `G(s)` by adaptive quadrature, relative error about `tol`.
pub fn g_exact(s: f64, tol: f64) -> Result<f64> {
    check_positive(s, "G")?;
    let mut f = |phi: f64| {
        let d = 2.0 * one_minus_cos(phi) + s;
        phi.cos() / (d * d.sqrt())
    };
    adaptive_qk(&mut f, &kernel_breaks(s), tol, 0.0, 2000, "kernel G")
}

/// `H(s)` by adaptive quadrature, relative error about `tol`.
pub fn h_exact(s: f64, tol: f64) -> Result<f64> {
    check_positive(s, "H")?;
    let mut f = |phi: f64| {
        let c = one_minus_cos(phi);
        let d = 2.0 * c + s;
        c / (d * d.sqrt())
    };
    adaptive_qk(&mut f, &kernel_breaks(s), tol, 0.0, 2000, "kernel H")
}

/// `dG/ds` by differentiating under the integral sign.
fn g_prime(s: f64, tol: f64) -> Result<f64> {
    let mut f = |phi: f64| {
        let d = 2.0 * one_minus_cos(phi) + s;
        -1.5 * phi.cos() / (d * d * d.sqrt())
    };
    adaptive_qk(&mut f, &kernel_breaks(s), tol, 0.0, 2000, "kernel G'")
}

fn h_prime(s: f64, tol: f64) -> Result<f64> {
    let mut f = |phi: f64| {
        let c = one_minus_cos(phi);
        let d = 2.0 * c + s;
        -1.5 * c / (d * d * d.sqrt())
    };
    adaptive_qk(&mut f, &kernel_breaks(s), tol, 0.0, 2000, "kernel H'")
}

/// `int_0^pi (phi^2 + s)^{-3/2} d phi = pi / (s sqrt(s + pi^2))`,
/// the exactly computable majorant of the `G` singularity.
pub fn aux_exact_1(s: f64) -> Result<f64> {
    check_positive(s, "aux_exact_1")?;
    Ok(PI / (s * (s + PI * PI).sqrt()))
}

/// `int_0^pi phi^2 (phi^2 + s)^{-3/2} d phi
///  = asinh(pi/sqrt(s)) - pi/sqrt(s + pi^2)`.
pub fn aux_exact_2(s: f64) -> Result<f64> {
    check_positive(s, "aux_exact_2")?;
    Ok((PI / s.sqrt()).asinh() - PI / (s + PI * PI).sqrt())
}

/// Quadrature twin of [`aux_exact_1`].
pub fn aux_quad_1(s: f64, tol: f64) -> Result<f64> {
    check_positive(s, "aux_quad_1")?;
    let mut f = |phi: f64| {
        let d = phi * phi + s;
        1.0 / (d * d.sqrt())
    };
    adaptive_qk(&mut f, &kernel_breaks(s), tol, 0.0, 600, "aux integral 1")
}

/// Quadrature twin of [`aux_exact_2`].
pub fn aux_quad_2(s: f64, tol: f64) -> Result<f64> {
    check_positive(s, "aux_quad_2")?;
    let mut f = |phi: f64| {
        let d = phi * phi + s;
        phi * phi / (d * d.sqrt())
    };
    adaptive_qk(&mut f, &kernel_breaks(s), tol, 0.0, 600, "aux integral 2")
}

/// Mean of `1/(rho - rho' e^{-i a})` over the circle, by quadrature.
/// Returns `(re, im)`; the exact value is `(1/rho) [rho > rho']` with
/// zero imaginary part. Panels are graded toward the near-singularity
/// at `a = 0` when the radii are close.
pub fn mean_value_circle(rho: f64, rho_p: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) || !(rho_p > 0.0) {
        return Err(Error::invalid("mean_value_circle requires positive radii"));
    }
    if rho == rho_p {
        return Err(Error::invalid(
            "mean_value_circle is singular for equal radii",
        ));
    }
    let scale = ((rho - rho_p).abs() / rho.max(rho_p)).min(1.0);
    let mut f = |a: f64| {
        // 1/(rho - rho' e^{-ia}) = conj(denom)/|denom|^2
        let dr = rho - rho_p * a.cos();
        let di = rho_p * a.sin();
        let n = dr * dr + di * di;
        [dr / n, -di / n]
    };
    // grade toward both endpoints, where the pole approaches the path
    let mut breaks: Vec<f64> = graded_breaks(0.0, PI, scale / 4.0);
    let tail: Vec<f64> = breaks[..breaks.len() - 1]
        .iter()
        .rev()
        .map(|b| TWO_PI - b)
        .collect();
    breaks.extend(tail);
    let v = adaptive_qk(&mut f, &breaks, 1e-12, 1e-14, 800, "mean value circle")?;
    Ok((v[0] / TWO_PI, v[1] / TWO_PI))
}

/// Indicator form of the circle mean: `(1/rho) [rho > rho']`.
pub fn mean_value_indicator(rho: f64, rho_p: f64) -> f64 {
    if rho > rho_p {
        1.0 / rho
    } else {
        0.0
    }
}

/// The planar point-vortex kernel `i/(2 pi zeta*)` as a 2-vector.
pub fn k_2d(w: Vec2) -> Result<Vec2> {
    let n2 = w.norm_sq();
    if n2 == 0.0 {
        return Err(Error::invalid("planar kernel evaluated at the origin"));
    }
    Ok(w.perp().scale(1.0 / (TWO_PI * n2)))
}

/// Both parts of an axisymmetric kernel evaluation: the rotational
/// (G) part and the vertical (H) part; the full kernel is their sum.
#[derive(Debug, Clone, Copy)]
pub struct KernelParts {
    pub rotational: Vec2,
    pub vertical: Vec2,
}

impl KernelParts {
    #[inline]
    pub fn total(&self) -> Vec2 {
        self.rotational + self.vertical
    }
}

/// Log-log cubic Hermite table for one kernel.
struct HermiteTable {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl HermiteTable {
    fn eval(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.h;
        let k = (t.floor() as usize).min(self.y.len() - 2);
        let u = t - k as f64;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (d0, d1) = (self.dy[k] * self.h, self.dy[k + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        y0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + d0 * (u3 - 2.0 * u2 + u)
            + y1 * (-2.0 * u3 + 3.0 * u2)
            + d1 * (u3 - u2)
    }
}

/// Fritsch-Carlson limiting: clamps Hermite slopes so the
/// interpolant preserves the monotonicity of the data. For resolved
/// smooth monotone data the clamp never engages.
fn limit_slopes(x_step: f64, y: &[f64], dy: &mut [f64]) {
    let n = y.len();
    for k in 0..n - 1 {
        let secant = (y[k + 1] - y[k]) / x_step;
        for d in [k, k + 1] {
            if secant == 0.0 {
                continue;
            }
            let ratio = dy[d] / secant;
            if ratio < 0.0 {
                dy[d] = 0.0;
            } else if ratio > 3.0 {
                dy[d] = 3.0 * secant;
            }
        }
    }
}

/// Shared `(s -> G, H)` cache with asymptotic continuations outside
/// the tabulated range. Read-only after construction.
pub struct KernelTable {
    g: HermiteTable,
    h: HermiteTable,
    s_min: f64,
    s_max: f64,
    /// fitted `G - 1/s ~ a ln s + b` below `s_min`
    g_tail: (f64, f64),
    /// `H + ln(s)/4 -> const` below `s_min`
    h_tail: f64,
    tol: f64,
}

impl KernelTable {
    /// Build a table whose interpolation error is comfortably below
    /// `tol` (relative).
    pub fn build(tol: f64) -> Result<Self> {
        let tol = tol.clamp(1e-13, 1e-3);
        let s_min: f64 = 1e-10;
        let s_max: f64 = 1e4;
        // Hermite error ~ h^4/384 * max|y''''| with y smooth on the
        // log-log scale; a modest safety factor covers the quartic
        // derivative.
        let h_target = (384.0 * (0.03 * tol)).powf(0.25);
        let decades = (s_max / s_min).log10();
        let n = ((decades * std::f64::consts::LN_10 / h_target).ceil() as usize).clamp(64, 4096);
        let x0 = s_min.ln();
        let x1 = s_max.ln();
        let h = (x1 - x0) / n as f64;
        let quad_tol = (0.01 * tol).max(1e-13);

        let mut gy = Vec::with_capacity(n + 1);
        let mut gdy = Vec::with_capacity(n + 1);
        let mut hy = Vec::with_capacity(n + 1);
        let mut hdy = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let s = (x0 + k as f64 * h).exp();
            let g = g_exact(s, quad_tol)?;
            let hh = h_exact(s, quad_tol)?;
            let gp = g_prime(s, quad_tol)?;
            let hp = h_prime(s, quad_tol)?;
            gy.push(g.ln());
            gdy.push(s * gp / g); // d(ln G)/d(ln s)
            hy.push(hh.ln());
            hdy.push(s * hp / hh);
        }
        limit_slopes(h, &gy, &mut gdy);
        limit_slopes(h, &hy, &mut hdy);

        // tail fits below s_min from the two smallest grid points
        let s0 = s_min;
        let s1 = (x0 + h).exp();
        let r0 = gy[0].exp() - 1.0 / s0;
        let r1 = gy[1].exp() - 1.0 / s1;
        let a = (r1 - r0) / (s1.ln() - s0.ln());
        let b = r0 - a * s0.ln();
        let h_tail = hy[0].exp() + 0.25 * s0.ln();

        Ok(KernelTable {
            g: HermiteTable {
                x0,
                h,
                y: gy,
                dy: gdy,
            },
            h: HermiteTable {
                x0,
                h,
                y: hy,
                dy: hdy,
            },
            s_min,
            s_max,
            g_tail: (a, b),
            h_tail,
            tol,
        })
    }

    /// Shared table for a tolerance bucket; built once per process.
    pub fn shared_for(tol: f64) -> Arc<KernelTable> {
        static CACHE: OnceLock<Mutex<BTreeMap<i32, Arc<KernelTable>>>> = OnceLock::new();
        // bucket by decade so nearby tolerances share one table
        let bucket = tol.log10().floor().clamp(-13.0, -4.0) as i32;
        let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
        let mut map = cache.lock().expect("kernel cache lock");
        map.entry(bucket)
            .or_insert_with(|| {
                Arc::new(KernelTable::build(10f64.powi(bucket)).expect("kernel table build"))
            })
            .clone()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn g(&self, s: f64) -> Result<f64> {
        check_positive(s, "G")?;
        if s < self.s_min {
            let (a, b) = self.g_tail;
            return Ok(1.0 / s + a * s.ln() + b);
        }
        if s > self.s_max {
            return g_exact(s, self.tol * 0.1);
        }
        Ok(self.g.eval(s.ln()).exp())
    }

    pub fn h(&self, s: f64) -> Result<f64> {
        check_positive(s, "H")?;
        if s < self.s_min {
            return Ok(-0.25 * s.ln() + self.h_tail);
        }
        if s > self.s_max {
            return h_exact(s, self.tol * 0.1);
        }
        Ok(self.h.eval(s.ln()).exp())
    }

    /// The axisymmetric kernel split into its rotational (G) and
    /// vertical (H) parts. Fails for coincident points, where the
    /// kernel is singular.
    pub fn k_ax(&self, zeta: HalfPlanePoint, zeta_p: HalfPlanePoint) -> Result<KernelParts> {
        let diff = zeta.sub(zeta_p);
        if diff.norm_sq() == 0.0 {
            return Err(Error::invalid("axisymmetric kernel at coincident points"));
        }
        let rr = zeta.r * zeta_p.r;
        debug_assert!(rr > 0.0);
        let sq = rr.sqrt();
        let zb = diff.scale(1.0 / sq);
        let s = zb.norm_sq();
        let g = self.g(s)?;
        let h = self.h(s)?;
        let pref = 1.0 / (TWO_PI * zeta.r);
        // i * (-zb G) and i * sqrt(r'/r) H, as 2-vectors
        Ok(KernelParts {
            rotational: zb.perp().scale(-g * pref),
            vertical: Vec2::new(0.0, (zeta_p.r / zeta.r).sqrt() * h * pref),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Brute-force midpoint oracle for the kernel integrals.
    fn brute(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = PI / n as f64;
        let mut acc = crate::numerics::CompensatedSum::new();
        for i in 0..n {
            acc.add(f((i as f64 + 0.5) * h));
        }
        acc.value() * h
    }

    #[test]
    fn g_and_h_match_brute_force_at_s1() {
        let g_oracle = brute(
            |p| p.cos() / (2.0 * (1.0 - p.cos()) + 1.0).powf(1.5),
            10_000_000,
        );
        let h_oracle = brute(
            |p| (1.0 - p.cos()) / (2.0 * (1.0 - p.cos()) + 1.0).powf(1.5),
            10_000_000,
        );
        // at s = 1 the naive and stable forms agree to full precision
        assert_relative_eq!(g_exact(1.0, 1e-12).unwrap(), g_oracle, max_relative = 1e-8);
        assert_relative_eq!(h_exact(1.0, 1e-12).unwrap(), h_oracle, max_relative = 1e-8);
    }

    #[test]
    fn g_singularity_strength() {
        // s G(s) -> 1 with an s log s correction
        for s in [1e-2, 1e-4, 1e-6] {
            let g = g_exact(s, 1e-11).unwrap();
            let defect = (s * g - 1.0).abs();
            assert!(
                defect <= 8.0 * s * s.ln().abs(),
                "sG defect {defect:e} too large at s={s:e}"
            );
        }
    }

    #[test]
    fn h_log_asymptotics_bounded() {
        // H(s) + log(s)/4 stays bounded (it tends to ~0.5397)
        for k in 0..=12 {
            let s = 1e-8 * 10f64.powf(k as f64 * 0.5);
            let h = h_exact(s, 1e-11).unwrap();
            let c = h + 0.25 * s.ln();
            assert!((0.3..0.7).contains(&c), "H + log(s)/4 = {c} at s={s:e}");
        }
    }

    #[test]
    fn g_decay_bound_for_large_s() {
        let g = g_exact(100.0, 1e-11).unwrap();
        assert!(g.abs() <= PI / 100.0f64.powf(1.5));
    }

    #[test]
    fn aux_identities_match_quadrature() {
        for k in 0..20 {
            let s = 1e-6 * 10f64.powf(8.0 * k as f64 / 19.0);
            assert_relative_eq!(
                aux_exact_1(s).unwrap(),
                aux_quad_1(s, 1e-12).unwrap(),
                max_relative = 1e-10
            );
            assert_relative_eq!(
                aux_exact_2(s).unwrap(),
                aux_quad_2(s, 1e-12).unwrap(),
                max_relative = 1e-10
            );
        }
        // frozen value at s = 1: pi/sqrt(1+pi^2)
        assert_relative_eq!(
            aux_exact_1(1.0).unwrap(),
            PI / (1.0 + PI * PI).sqrt(),
            max_relative = 1e-14
        );
        assert!(aux_exact_1(-1.0).is_err());
        // decay of the second integral for growing s
        let mut prev = f64::INFINITY;
        for s in [1.0, 10.0, 100.0, 1000.0] {
            let v = aux_exact_2(s).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn table_tracks_exact_kernels() {
        let table = KernelTable::build(1e-9).unwrap();
        for k in 0..40 {
            let s = 1e-9 * 10f64.powf(12.0 * k as f64 / 39.0);
            assert_relative_eq!(
                table.g(s).unwrap(),
                g_exact(s, 1e-12).unwrap(),
                max_relative = 5e-9
            );
            assert_relative_eq!(
                table.h(s).unwrap(),
                h_exact(s, 1e-12).unwrap(),
                max_relative = 5e-9
            );
        }
        // below the tabulated range the asymptotic continuation takes over
        for s in [1e-12, 1e-14, 1e-18] {
            assert_relative_eq!(table.g(s).unwrap() * s, 1.0, max_relative = 1e-9);
            let c = table.h(s).unwrap() + 0.25 * s.ln();
            assert!((0.3..0.7).contains(&c));
        }
        // above it, direct quadrature
        assert_relative_eq!(
            table.g(2e4).unwrap(),
            g_exact(2e4, 1e-12).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn kernels_positive_and_decreasing() {
        let table = KernelTable::shared_for(1e-8);
        let mut gp = f64::INFINITY;
        let mut hp = f64::INFINITY;
        for k in 0..60 {
            let s = 1e-8 * 10f64.powf(12.0 * k as f64 / 59.0);
            let g = table.g(s).unwrap();
            let h = table.h(s).unwrap();
            assert!(g > 0.0 && h > 0.0, "positivity fails at s={s:e}");
            assert!(g < gp && h < hp, "monotonicity fails at s={s:e}");
            gp = g;
            hp = h;
        }
    }

    #[test]
    fn k_2d_frozen_values() {
        let v = k_2d(Vec2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(v.r, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.z, 1.0 / TWO_PI, epsilon = 1e-15);
        let v = k_2d(Vec2::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(v.r, -1.0 / TWO_PI, epsilon = 1e-15);
        assert_relative_eq!(v.z, 0.0, epsilon = 1e-15);
        assert!(k_2d(Vec2::ZERO).is_err());
    }

    #[test]
    fn k_2d_modulus_identity() {
        for w in [Vec2::new(0.3, -0.4), Vec2::new(2.0, 1.0), Vec2::new(-5.0, 0.1)] {
            let v = k_2d(w).unwrap();
            assert_relative_eq!(v.norm(), 1.0 / (TWO_PI * w.norm()), max_relative = 1e-14);
        }
    }

    #[test]
    fn mean_value_circle_matches_indicator() {
        let cases = [(1.0, 0.5), (0.5, 1.0), (2.0, 1.99)];
        for (rho, rho_p) in cases {
            let (re, im) = mean_value_circle(rho, rho_p).unwrap();
            assert_relative_eq!(
                re,
                mean_value_indicator(rho, rho_p),
                max_relative = 1e-10,
                epsilon = 1e-10
            );
            assert!(im.abs() < 1e-10);
        }
        assert!(mean_value_circle(1.0, 1.0).is_err());
    }

    #[test]
    fn k_ax_near_singularity_matches_point_vortex() {
        // as zeta' -> zeta the kernel approaches the planar point
        // vortex with reversed circulation, -i/(2 pi (zeta-zeta')*):
        // the meridional curl of the induced field is -omega_theta
        let table = KernelTable::shared_for(1e-10);
        let zeta = HalfPlanePoint { r: 1.3, z: 0.4 };
        let mut prev_ratio_err = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4] {
            let zp = HalfPlanePoint {
                r: zeta.r + eps * 0.6,
                z: zeta.z - eps * 0.8,
            };
            let v = table.k_ax(zeta, zp).unwrap().total();
            let pv = -k_2d(zeta.sub(zp)).unwrap();
            let err = (v - pv).norm() / pv.norm();
            assert!(err < prev_ratio_err);
            prev_ratio_err = err;
        }
        assert!(prev_ratio_err < 2e-3);
    }

    #[test]
    fn k_ax_reflection_symmetry() {
        let table = KernelTable::shared_for(1e-10);
        let a = HalfPlanePoint { r: 1.2, z: 0.7 };
        let b = HalfPlanePoint { r: 0.8, z: -0.3 };
        let v = table.k_ax(a, b).unwrap().total();
        let vm = table
            .k_ax(
                HalfPlanePoint { r: a.r, z: -a.z },
                HalfPlanePoint { r: b.r, z: -b.z },
            )
            .unwrap()
            .total();
        assert_relative_eq!(vm.r, -v.r, max_relative = 1e-9, epsilon = 1e-12);
        assert_relative_eq!(vm.z, v.z, max_relative = 1e-9, epsilon = 1e-12);
    }

    /// Velocity of a unit-strength circular filament at `(r', z')`
    /// evaluated at `(r, 0, z)`, by brute-force integration of the
    /// three-dimensional Biot-Savart kernel over the circle.
    fn ring_kernel_3d(zeta: HalfPlanePoint, zp: HalfPlanePoint, n: usize) -> Vec2 {
        let x = [zeta.r, 0.0, zeta.z];
        let mut vr = crate::numerics::CompensatedSum::new();
        let mut vz = crate::numerics::CompensatedSum::new();
        for i in 0..n {
            let th = TWO_PI * (i as f64 + 0.5) / n as f64;
            let xs = [zp.r * th.cos(), zp.r * th.sin(), zp.z];
            let et = [-th.sin(), th.cos(), 0.0];
            let d = [x[0] - xs[0], x[1] - xs[1], x[2] - xs[2]];
            let dn = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let cross = [
                d[1] * et[2] - d[2] * et[1],
                d[2] * et[0] - d[0] * et[2],
                d[0] * et[1] - d[1] * et[0],
            ];
            vr.add(cross[0] / (dn * dn * dn));
            vz.add(cross[2] / (dn * dn * dn));
        }
        let w = -(1.0 / (4.0 * PI)) * zp.r * TWO_PI / n as f64;
        Vec2::new(vr.value() * w, vz.value() * w)
    }

    #[test]
    fn k_ax_matches_three_dimensional_ring_integral() {
        let table = KernelTable::shared_for(1e-10);
        let pairs = [
            (
                HalfPlanePoint { r: 1.0, z: 0.3 },
                HalfPlanePoint { r: 1.2, z: 0.1 },
            ),
            (
                HalfPlanePoint { r: 0.5, z: -0.2 },
                HalfPlanePoint { r: 1.0, z: 0.0 },
            ),
            (
                HalfPlanePoint { r: 12.0, z: 5.0 },
                HalfPlanePoint { r: 1.0, z: 0.2 },
            ),
        ];
        for (zeta, zp) in pairs {
            let v = table.k_ax(zeta, zp).unwrap().total();
            let oracle = ring_kernel_3d(zeta, zp, 400_000);
            assert_relative_eq!(v.r, oracle.r, max_relative = 1e-6, epsilon = 1e-12);
            assert_relative_eq!(v.z, oracle.z, max_relative = 1e-6, epsilon = 1e-12);
        }
    }

    #[test]
    fn coincident_points_rejected() {
        let table = KernelTable::shared_for(1e-8);
        let p = HalfPlanePoint { r: 1.0, z: 0.0 };
        assert!(table.k_ax(p, p).is_err());
    }
}
