//! Shared numerical machinery: Gauss-Kronrod adaptive panels,
//! Gauss-Legendre rules, periodic trapezoid sums, compensated
//! summation and a least-squares slope.

use crate::{Error, Result};

/// Output type for vector-valued quadrature. Implemented for `f64`
/// and small fixed arrays so a single adaptive pass can integrate
/// several components at once.
pub trait QuadVec: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, a: f64) -> Self;
    /// Max-norm, used for error control.
    fn norm(&self) -> f64;
}

impl QuadVec for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, a: f64) -> Self {
        self * a
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl<const N: usize> QuadVec for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    fn add(mut self, other: Self) -> Self {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += b;
        }
        self
    }
    fn scale(mut self, a: f64) -> Self {
        for v in self.iter_mut() {
            *v *= a;
        }
        self
    }
    fn norm(&self) -> f64 {
        self.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Neumaier compensated sum: accurate accumulation in a fixed order,
/// so parallel reductions that collect per-index results first stay
/// bit-reproducible regardless of worker count.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

// 15-point Gauss-Kronrod pair (7-point Gauss embedded), as in QUADPACK.
const XGK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG7: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// QUADPACK-style downscaling of the raw `|kronrod - gauss|`
/// difference, which estimates the error of the embedded Gauss rule
/// and is far too pessimistic once a panel is resolved.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut scaled = err.abs();
    if resasc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / resasc).powf(1.5);
        scaled = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * resabs);
    }
    scaled
}

/// One 15-point Gauss-Kronrod panel. Returns (kronrod value, error
/// estimate, integral of |f|).
pub fn qk15<V: QuadVec, F: FnMut(f64) -> V>(mut f: F, a: f64, b: f64) -> (V, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut samples = [V::zero(); 15];
    samples[14] = f(center);
    for j in 0..7 {
        let dx = half * XGK15[j];
        samples[2 * j] = f(center - dx);
        samples[2 * j + 1] = f(center + dx);
    }

    let mut kronrod = samples[14].scale(WGK15[7]);
    let mut gauss = samples[14].scale(WG7[3]);
    let mut resabs = samples[14].norm() * WGK15[7];
    for j in 0..7 {
        let pair = samples[2 * j].add(samples[2 * j + 1]);
        kronrod = kronrod.add(pair.scale(WGK15[j]));
        resabs += WGK15[j] * (samples[2 * j].norm() + samples[2 * j + 1].norm());
        if j % 2 == 1 {
            gauss = gauss.add(pair.scale(WG7[j / 2]));
        }
    }

    // integral of |f - mean| for the error rescaling
    let mean = kronrod.scale(0.5);
    let mut resasc = samples[14].add(mean.scale(-1.0)).norm() * WGK15[7];
    for j in 0..7 {
        resasc += WGK15[j]
            * (samples[2 * j].add(mean.scale(-1.0)).norm()
                + samples[2 * j + 1].add(mean.scale(-1.0)).norm());
    }

    let raw = kronrod.add(gauss.scale(-1.0)).norm() * half.abs();
    let err = rescale_error(raw, resabs * half.abs(), resasc * half.abs());
    (kronrod.scale(half), err, resabs * half.abs())
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
    resabs: f64,
}

/// Adaptive Gauss-Kronrod over an interval list. Panels are bisected
/// worst-error-first until the summed error estimate falls below
/// `max(abs_tol, rel_tol * |I|)`. `breaks` must be strictly increasing
/// and is used as the initial panel structure; known kinks and
/// grading points belong there.
pub fn adaptive_qk<V: QuadVec>(
    f: &mut dyn FnMut(f64) -> V,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
    context: &str,
) -> Result<V> {
    debug_assert!(breaks.len() >= 2);
    let mut panels: Vec<Panel<V>> = Vec::with_capacity(max_panels.min(256));
    for w in breaks.windows(2) {
        let (v, e, ra) = qk15(&mut *f, w[0], w[1]);
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
            resabs: ra,
        });
    }

    loop {
        let mut total = V::zero();
        let mut err_sum = 0.0;
        let mut resabs_sum = 0.0;
        for p in &panels {
            total = total.add(p.value);
            err_sum += p.err;
            resabs_sum += p.resabs;
        }
        // accept at the roundoff floor: no amount of refinement beats it
        let target = abs_tol
            .max(rel_tol * total.norm())
            .max(100.0 * f64::EPSILON * resabs_sum);
        if err_sum <= target {
            return Ok(total);
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureFailure {
                context: context.to_string(),
                best_error: err_sum,
            });
        }
        // split the worst panel (first index on ties keeps this deterministic)
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.err > panels[worst].err {
                worst = i;
            }
        }
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval at floating-point resolution; accept what we have
            return Ok(panels.iter().fold(V::zero(), |acc, p| acc.add(p.value)));
        }
        let (v1, e1, ra1) = qk15(&mut *f, a, mid);
        let (v2, e2, ra2) = qk15(&mut *f, mid, b);
        panels[worst] = Panel {
            a,
            b: mid,
            value: v1,
            err: e1,
            resabs: ra1,
        };
        panels.push(Panel {
            a: mid,
            b,
            value: v2,
            err: e2,
            resabs: ra2,
        });
    }
}

/// Convenience wrapper for a single smooth interval.
pub fn integrate<V: QuadVec>(
    f: &mut dyn FnMut(f64) -> V,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    context: &str,
) -> Result<V> {
    adaptive_qk(f, &[a, b], rel_tol, abs_tol, 400, context)
}

/// Breakpoints for `[a, b]` graded geometrically toward `a`, with the
/// finest panel of width about `scale`. Used to resolve endpoint
/// singularities of log type.
pub fn graded_breaks(a: f64, b: f64, scale: f64) -> Vec<f64> {
    let len = b - a;
    debug_assert!(len > 0.0);
    let scale = scale.clamp(len * 1e-14, len);
    let mut cuts = vec![b];
    let mut w = len;
    while w > scale {
        w *= 0.25;
        cuts.push(a + w);
    }
    cuts.push(a);
    cuts.reverse();
    cuts
}

/// Uniform midpoint rule over one period of a periodic function
/// (spectrally accurate for smooth periodic integrands).
pub fn periodic_midpoint<V: QuadVec>(f: &mut dyn FnMut(f64) -> V, period: f64, n: usize) -> V {
    let h = period / n as f64;
    let mut acc = V::zero();
    for k in 0..n {
        acc = acc.add(f((k as f64 + 0.5) * h));
    }
    acc.scale(h)
}

/// Periodic quadrature with node doubling until two consecutive
/// refinements agree to `rel_tol` (plus `abs_tol` floor).
pub fn periodic_adaptive<V: QuadVec>(
    f: &mut dyn FnMut(f64) -> V,
    period: f64,
    n0: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_nodes: usize,
    context: &str,
) -> Result<V> {
    let mut n = n0.max(8);
    let mut prev = periodic_midpoint(&mut *f, period, n);
    loop {
        n *= 2;
        let cur = periodic_midpoint(&mut *f, period, n);
        let diff = cur.add(prev.scale(-1.0)).norm();
        if diff <= abs_tol.max(rel_tol * cur.norm()) {
            return Ok(cur);
        }
        if n > max_nodes {
            return Err(Error::QuadratureFailure {
                context: context.to_string(),
                best_error: diff,
            });
        }
        prev = cur;
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cached 16-point Gauss-Legendre rule mapped to `[a, b]`.
pub fn gl16(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    let (x, w) = RULE.get_or_init(|| gauss_legendre(16));
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    x.iter()
        .zip(w.iter())
        .map(move |(&xi, &wi)| (mid + half * xi, half * wi))
        .collect::<Vec<_>>()
        .into_iter()
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("slope fit needs >= 2 points"));
    }
    let n = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / n;
    let ybar = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y.iter()) {
        sxx += (xi - xbar) * (xi - xbar);
        sxy += (xi - xbar) * (yi - ybar);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("degenerate abscissae in slope fit"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn qk_exact_on_polynomials() {
        // 15-point Kronrod integrates degree <= 22 exactly
        let mut f = |x: f64| x.powi(9) - 3.0 * x.powi(4) + 2.0;
        let (v, _, _) = qk15(&mut f, 0.0, 1.0);
        assert_relative_eq!(v, 0.1 - 0.6 + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_handles_log_endpoint() {
        let mut f = |x: f64| x.ln();
        let breaks = graded_breaks(0.0, 1.0, 1e-10);
        let v = adaptive_qk(&mut f, &breaks, 1e-12, 0.0, 400, "log").unwrap();
        assert_relative_eq!(v, -1.0, epsilon = 1e-11);
    }

    #[test]
    fn vector_valued_integration() {
        let mut f = |x: f64| [x.sin(), x.cos()];
        let v = integrate(&mut f, 0.0, std::f64::consts::PI, 1e-12, 0.0, "sincos").unwrap();
        assert_relative_eq!(v[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(v[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn periodic_rule_is_spectral() {
        let mut f = |x: f64| (x.sin()).exp();
        let v = periodic_adaptive(
            &mut f,
            2.0 * std::f64::consts::PI,
            16,
            1e-13,
            0.0,
            1 << 20,
            "besseloid",
        )
        .unwrap();
        // 2*pi*I_0(1)
        assert_relative_eq!(v, 2.0 * std::f64::consts::PI * 1.2660658777520084, epsilon = 1e-11);
    }

    #[test]
    fn gauss_legendre_rule_integrates_high_degree() {
        let (x, w) = gauss_legendre(16);
        let v: f64 = x
            .iter()
            .zip(w.iter())
            .map(|(&xi, &wi)| wi * xi.powi(30))
            .sum();
        assert_relative_eq!(v, 2.0 / 31.0, epsilon = 1e-13);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let vals: Vec<f64> = (0..100_000).map(|i| 1e-10 + (i as f64) * 0.0).collect();
        let mut acc = CompensatedSum::new();
        acc.add(1e10);
        for &v in &vals {
            acc.add(v);
        }
        acc.add(-1e10);
        assert_relative_eq!(acc.value(), 1e-10 * 100_000.0, max_relative = 1e-12);
    }

    #[test]
    fn slope_of_line_is_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert_relative_eq!(ls_slope(&x, &y).unwrap(), 2.0, epsilon = 1e-14);
    }
}
