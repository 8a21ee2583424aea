//! Field-side quantities: the Meissner field of the ball, flux integrals over
//! meridian surfaces swept by displaced filaments, second-order field jets
//! along the axis, Biot-Savart evaluation for closed polylines, and the
//! domain constant extracted from a regularised field energy.

use std::sync::Arc;

use crate::geometry::{check_span, BallChart, BallGeometry, SampledGraph};
use crate::quad::{adaptive_simpson, gauss_legendre};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// small 3-vector helpers (local; nalgebra would be overkill for these loops)

#[inline]
fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

// ---------------------------------------------------------------------------
// Meissner field of the ball

/// Prefactor `3 rho / (2 sinh rho)` normalising the ball's Meissner field so
/// the curl is asymptotically half the distance to the axis for small balls.
pub(crate) fn meissner_prefactor(rho: f64) -> f64 {
    1.5 * rho / rho.sinh()
}

/// The radial kernel `(cosh r - sinh r / r) / r^2`, computed by a series for
/// small `r` where the direct expression loses all its leading digits.
pub(crate) fn curl_kernel(r: f64) -> f64 {
    let r = r.abs();
    if r < 0.35 {
        // (2j+2)/(2j+3)! for j = 0..6; the next term is below 1e-19
        // relative for r < 0.35.
        let r2 = r * r;
        let c = [
            1.0 / 3.0,
            1.0 / 30.0,
            1.0 / 840.0,
            1.0 / 45_360.0,
            1.0 / 3_991_680.0,
            1.0 / 518_918_400.0,
            1.0 / 93_405_312_000.0,
        ];
        let mut acc = c[6];
        for k in (0..6).rev() {
            acc = c[k] + r2 * acc;
        }
        acc
    } else {
        (r.cosh() - r.sinh() / r) / (r * r)
    }
}

/// Azimuthal curl of the Meissner field of the ball of radius `rho`, at the
/// point with spherical radius `r` and polar angle `phi` from the axis:
///
/// ```text
/// curl = (3 rho / (2 sinh rho)) * (cosh r - sinh r / r) / r^2 * r sin(phi).
/// ```
///
/// `r sin(phi)` is the distance to the axis, so for small balls the curl
/// approaches half that distance.
pub fn ball_meissner_curl(rho: f64, r: f64, phi: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("ball radius must be positive, got {rho}")));
    }
    if !(r >= 0.0) || r > rho * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "radial coordinate r = {r} outside the ball of radius {rho}"
        )));
    }
    if !phi.is_finite() {
        return Err(Error::Domain("polar angle must be finite".into()));
    }
    Ok(meissner_prefactor(rho) * curl_kernel(r) * r * phi.sin())
}

/// Flux of the Meissner curl through the meridian half-disk of the ball,
/// computed by nested adaptive quadrature in polar coordinates on the
/// half-disk. Behaves like `rho^3 / 3 - (8/225) rho^5` for small balls.
pub fn flux_gamma0_ball(rho: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("ball radius must be positive, got {rho}")));
    }
    let pref = meissner_prefactor(rho);
    let scale = rho * rho * rho / 3.0;
    let inner_tol = 1e-13 * scale / rho;
    let outer = |r: f64| -> f64 {
        // flux element c(r, phi) * r dr dphi with c = pref * kernel * r sin(phi)
        let row = adaptive_simpson(
            &|phi: f64| pref * curl_kernel(r) * r * phi.sin() * r,
            0.0,
            std::f64::consts::PI,
            inner_tol,
            30,
        );
        row.unwrap_or(f64::NAN)
    };
    adaptive_simpson(&outer, 0.0, rho, 1e-13 * scale, 36)
}

// ---------------------------------------------------------------------------
// flux through the surface swept between the axis and a displaced graph curve

/// Meridian flux density at Mobius coordinates `(sigma, z)`: the curl at the
/// image point times the Jacobian of the meridian map.
#[inline]
fn meridian_flux_density(chart: &BallChart, pref: f64, sigma: f64, z: f64) -> f64 {
    let rho = chart.rho();
    let (r_cyl, z_cart) = chart.meridian_map(sigma, z);
    let d = 1.0 + sigma * sigma * z * z;
    let jac = rho * rho * (1.0 - sigma * sigma) * (1.0 + z * z) / (d * d);
    let r_sph = r_cyl.hypot(z_cart);
    pref * curl_kernel(r_sph) * r_cyl * jac
}

fn flux_pass(
    curve: &SampledGraph,
    chart: &BallChart,
    mut grad: Option<&mut [[f64; 2]]>,
) -> Result<f64> {
    check_span(curve, 2.0 * chart.rho())?;
    let rho = chart.rho();
    let pref = meissner_prefactor(rho);
    let s_nodes = curve.z_nodes();
    let u = curve.u_values();
    for (k, uk) in u.iter().enumerate() {
        let x = uk[0].hypot(uk[1]);
        if !(x < 0.9) {
            return Err(Error::Domain(format!(
                "displacement |u| = {x:.6} at grid node {k} leaves the chart"
            )));
        }
    }
    let (tq, wq) = gauss_legendre(8);
    let (ti, wi) = gauss_legendre(24);
    let mut total = 0.0;
    for k in 0..u.len() - 1 {
        let (s0, s1) = (s_nodes[k], s_nodes[k + 1]);
        let hs = s1 - s0;
        for (ta, wa) in tq.iter().zip(&wq) {
            let s = 0.5 * (s0 + s1) + 0.5 * hs * ta;
            let lam = (s - s0) / hs;
            let ua = [
                u[k][0] + lam * (u[k + 1][0] - u[k][0]),
                u[k][1] + lam * (u[k + 1][1] - u[k][1]),
            ];
            let x = ua[0].hypot(ua[1]);
            let z = chart.z_of_s(s);
            let outer_w = hs * wa / (2.0 * rho);
            if x > 0.0 {
                let mut inner = 0.0;
                for (tb, wb) in ti.iter().zip(&wi) {
                    let sigma = 0.5 * x * (1.0 + tb);
                    inner += wb * meridian_flux_density(chart, pref, sigma, z);
                }
                total -= outer_w * 0.5 * x * inner;
            }
            if let Some(g) = grad.as_deref_mut() {
                if x > 1e-14 {
                    // Leibniz: the inner integral differentiates to its
                    // integrand at the moving endpoint sigma = x.
                    let dflux_dx = -outer_w * meridian_flux_density(chart, pref, x, z);
                    let uhat = [ua[0] / x, ua[1] / x];
                    for i in 0..2 {
                        g[k][i] += dflux_dx * (1.0 - lam) * uhat[i];
                        g[k + 1][i] += dflux_dx * lam * uhat[i];
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Flux difference between the meridian surface swept by the graph curve `u`
/// and the surface swept by the axis itself, for the Meissner curl of the
/// ball: minus the integral over `s` of the flux density between the axis
/// and `|u(s)|`. Negative whenever the curve actually bulges, since the
/// density is positive off the axis.
pub fn flux_difference(curve: &SampledGraph, chart: &BallChart) -> Result<f64> {
    flux_pass(curve, chart, None)
}

/// Gradient of [`flux_difference`] with respect to the nodal displacements,
/// one 2-vector per grid node.
pub fn flux_difference_gradient(
    curve: &SampledGraph,
    chart: &BallChart,
) -> Result<Vec<[f64; 2]>> {
    let mut grad = vec![[0.0; 2]; curve.len()];
    flux_pass(curve, chart, Some(&mut grad))?;
    Ok(grad)
}

// ---------------------------------------------------------------------------
// second-order jet of the background field along the axis

/// Second-order transverse expansion of the flux functional about the axis:
/// a linear coefficient (zero for the ball by symmetry), a skew coefficient
/// pairing `u` with `u'`, and the symmetric quadratic coefficient matrix
/// `M(s)`, so that for small displacements
///
/// ```text
/// flux(u) = int [ lin(s).u + 1/2 skew(s) det(u, u') + 1/2 u^T M(s) u ] ds + O(|u|^3).
/// ```
#[derive(Clone)]
pub struct FieldJet {
    l0: f64,
    linear: Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>,
    skew: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    quad: Arc<dyn Fn(f64) -> [[f64; 2]; 2] + Send + Sync>,
}

impl FieldJet {
    /// Exact jet for the ball of radius `rho`. The linear and skew parts
    /// vanish identically; the quadratic part is the isotropic matrix
    /// `-rho^2 (1 + zh^2)^2 * pref * kernel(rho * zh) * Id` with
    /// `zh = s/rho - 1`.
    pub fn ball(rho: f64) -> Result<Self> {
        BallChart::new(rho)?;
        let pref = meissner_prefactor(rho);
        let quad = move |s: f64| {
            let zh = s / rho - 1.0;
            let a = 1.0 + zh * zh;
            let m = -rho * rho * a * a * pref * curl_kernel(rho * zh);
            [[m, 0.0], [0.0, m]]
        };
        Ok(FieldJet {
            l0: 2.0 * rho,
            linear: Arc::new(|_| [0.0; 2]),
            skew: Arc::new(|_| 0.0),
            quad: Arc::new(quad),
        })
    }

    /// Recovers the jet of the ball's flux functional from finite differences
    /// of [`flux_difference`] against nodal hat probes on a uniform grid with
    /// `m` elements and probe amplitude `step`.
    ///
    /// The odd part of each probe pair gives the linear coefficient, the even
    /// part the diagonal and (via a mixed direction) off-diagonal quadratic
    /// coefficients, each divided by the integral of the hat or its square.
    /// Nodal values are interpolated linearly in `s`. Hat probes keep `u`
    /// parallel to `u'`, so they cannot excite the skew coefficient; it is
    /// returned as zero, which is the ball's exact value. Recovery smears
    /// the quadratic coefficient over one hat width, an `O(1/m^2)` relative
    /// effect.
    pub fn from_flux_probe(chart: &BallChart, m: usize, step: f64) -> Result<Self> {
        if m < 4 {
            return Err(Error::Argument(format!("need at least 4 probe elements, got {m}")));
        }
        if !(step > 0.0) || !step.is_finite() || step >= 0.45 {
            return Err(Error::Argument(format!("probe amplitude {step} out of range")));
        }
        let l0 = 2.0 * chart.rho();
        let h = l0 / m as f64;
        let dirs: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let mut lin = vec![[0.0; 2]; m + 1];
        let mut quad = vec![[[0.0; 2]; 2]; m + 1];
        for j in 0..=m {
            let (w1, w2) = if j == 0 || j == m {
                (0.5 * h, h / 3.0)
            } else {
                (h, 2.0 * h / 3.0)
            };
            let mut even = [0.0; 3];
            let mut odd = [0.0; 3];
            for (di, dir) in dirs.iter().enumerate() {
                let probe = |amp: f64| -> Result<f64> {
                    let curve = SampledGraph::uniform(l0, m, |s| {
                        let phi = (1.0 - (s - j as f64 * h).abs() / h).max(0.0);
                        [amp * phi * dir[0], amp * phi * dir[1]]
                    });
                    flux_difference(&curve, chart)
                };
                let fp = probe(step)?;
                let fm = probe(-step)?;
                even[di] = (fp + fm) / (step * step);
                odd[di] = (fp - fm) / (2.0 * step);
            }
            lin[j] = [odd[0] / w1, odd[1] / w1];
            let m11 = even[0] / w2;
            let m22 = even[1] / w2;
            let m12 = 0.5 * (even[2] / w2 - m11 - m22);
            quad[j] = [[m11, m12], [m12, m22]];
        }
        let interp = move |s: f64, values: &[f64]| -> f64 {
            let t = (s / h).clamp(0.0, m as f64);
            let k = (t.floor() as usize).min(m - 1);
            let lam = t - k as f64;
            values[k] * (1.0 - lam) + values[k + 1] * lam
        };
        let lin_x: Vec<f64> = lin.iter().map(|v| v[0]).collect();
        let lin_y: Vec<f64> = lin.iter().map(|v| v[1]).collect();
        let q11: Vec<f64> = quad.iter().map(|q| q[0][0]).collect();
        let q12: Vec<f64> = quad.iter().map(|q| q[0][1]).collect();
        let q22: Vec<f64> = quad.iter().map(|q| q[1][1]).collect();
        let interp_l = interp;
        let interp_q = interp;
        Ok(FieldJet {
            l0,
            linear: Arc::new(move |s| [interp_l(s, &lin_x), interp_l(s, &lin_y)]),
            skew: Arc::new(|_| 0.0),
            quad: Arc::new(move |s| {
                let a = interp_q(s, &q11);
                let b = interp_q(s, &q12);
                let c = interp_q(s, &q22);
                [[a, b], [b, c]]
            }),
        })
    }

    /// Jet built from explicit coefficient closures, for model fields whose
    /// expansion is prescribed directly.
    pub fn from_closures(
        l0: f64,
        linear: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static,
        skew: impl Fn(f64) -> f64 + Send + Sync + 'static,
        quad: impl Fn(f64) -> [[f64; 2]; 2] + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(l0 > 0.0) || !l0.is_finite() {
            return Err(Error::Argument(format!("axis length must be positive, got {l0}")));
        }
        Ok(FieldJet {
            l0,
            linear: Arc::new(linear),
            skew: Arc::new(skew),
            quad: Arc::new(quad),
        })
    }

    /// The identically vanishing jet on an axis of length `l0`.
    pub fn zero(l0: f64) -> Result<Self> {
        if !(l0 > 0.0) || !l0.is_finite() {
            return Err(Error::Argument(format!("axis length must be positive, got {l0}")));
        }
        Ok(FieldJet {
            l0,
            linear: Arc::new(|_| [0.0; 2]),
            skew: Arc::new(|_| 0.0),
            quad: Arc::new(|_| [[0.0; 2]; 2]),
        })
    }

    /// Every coefficient multiplied by `factor`. Used to manufacture fields
    /// that break the coercivity of the second variation in tests.
    pub fn scaled(&self, factor: f64) -> Self {
        let lin = Arc::clone(&self.linear);
        let skew = Arc::clone(&self.skew);
        let quad = Arc::clone(&self.quad);
        FieldJet {
            l0: self.l0,
            linear: Arc::new(move |s| {
                let v = lin(s);
                [factor * v[0], factor * v[1]]
            }),
            skew: Arc::new(move |s| factor * skew(s)),
            quad: Arc::new(move |s| {
                let q = quad(s);
                [
                    [factor * q[0][0], factor * q[0][1]],
                    [factor * q[1][0], factor * q[1][1]],
                ]
            }),
        }
    }

    /// Same jet with a constant vector added to the linear coefficient.
    /// Useful for constructing fields whose axis is deliberately not
    /// critical for the flux-to-length ratio.
    pub fn with_linear_term(&self, c: [f64; 2]) -> Self {
        let base = Arc::clone(&self.linear);
        FieldJet {
            l0: self.l0,
            linear: Arc::new(move |s| {
                let v = base(s);
                [v[0] + c[0], v[1] + c[1]]
            }),
            skew: Arc::clone(&self.skew),
            quad: Arc::clone(&self.quad),
        }
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn linear(&self, s: f64) -> [f64; 2] {
        (self.linear)(s)
    }

    pub fn skew(&self, s: f64) -> f64 {
        (self.skew)(s)
    }

    pub fn quad(&self, s: f64) -> [[f64; 2]; 2] {
        (self.quad)(s)
    }
}

// ---------------------------------------------------------------------------
// Biot-Savart field of closed polylines

/// A closed polyline in space: at least three vertices, consecutive vertices
/// distinct, with an implicit closing segment from the last vertex back to
/// the first. Operations that need an embedded (non-self-intersecting) curve
/// assume it; they do not verify it.
#[derive(Clone, Debug)]
pub struct ClosedCurve3D {
    points: Vec<[f64; 3]>,
}

impl ClosedCurve3D {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Argument(format!(
                "a closed curve needs at least 3 vertices, got {}",
                points.len()
            )));
        }
        let mut scale: f64 = 0.0;
        for p in &points {
            for c in p {
                if !c.is_finite() {
                    return Err(Error::Argument("curve vertex has a non-finite coordinate".into()));
                }
                scale = scale.max(c.abs());
            }
        }
        let tol = 1e-14 * (1.0 + scale);
        let n = points.len();
        for k in 0..n {
            let a = points[k];
            let b = points[(k + 1) % n];
            if norm3(sub3(b, a)) <= tol {
                return Err(Error::Argument(format!("repeated curve vertex at index {k}")));
            }
        }
        Ok(ClosedCurve3D { points })
    }

    /// Regular `n`-gon of given circumradius in the plane through `center`
    /// orthogonal to `normal`.
    pub fn regular_polygon(center: [f64; 3], normal: [f64; 3], radius: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Argument(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Argument(format!("polygon radius must be positive, got {radius}")));
        }
        let nn = norm3(normal);
        if !(nn > 0.0) || !nn.is_finite() {
            return Err(Error::Argument("polygon normal must be a nonzero vector".into()));
        }
        let nz = [normal[0] / nn, normal[1] / nn, normal[2] / nn];
        // pick the coordinate axis least aligned with the normal as a seed
        let seed = if nz[0].abs() <= nz[1].abs() && nz[0].abs() <= nz[2].abs() {
            [1.0, 0.0, 0.0]
        } else if nz[1].abs() <= nz[2].abs() {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let mut e1 = cross3(seed, nz);
        let n1 = norm3(e1);
        e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
        let e2 = cross3(nz, e1);
        let mut points = Vec::with_capacity(n);
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let (s, c) = t.sin_cos();
            points.push([
                center[0] + radius * (c * e1[0] + s * e2[0]),
                center[1] + radius * (c * e1[1] + s * e2[1]),
                center[2] + radius * (c * e1[2] + s * e2[2]),
            ]);
        }
        ClosedCurve3D::new(points)
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn total_length(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|k| norm3(sub3(self.points[(k + 1) % n], self.points[k])))
            .sum()
    }

    fn coordinate_scale(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Biot-Savart field `X(p) = 1/2 int (gamma - p) x gamma' / |gamma - p|^3`
/// of a closed polyline, summed segment by segment in closed form. With this
/// normalisation the field of the unit circle at its center is `pi` times
/// the circle's normal, and the circulation around a linking loop is `2 pi`.
///
/// Errors if `p` lies on the curve. Points collinear with a segment but off
/// it get a zero contribution from that segment, which is the exact limit.
pub fn biot_savart_eval(curve: &ClosedCurve3D, p: [f64; 3]) -> Result<[f64; 3]> {
    let pts = curve.points();
    let n = pts.len();
    let scale = curve.coordinate_scale().max(norm3(p));
    let on_tol = 1e-12 * (1.0 + scale);
    let mut x = [0.0; 3];
    for k in 0..n {
        let a = pts[k];
        let b = pts[(k + 1) % n];
        let c = sub3(a, p);
        let l = sub3(b, a);
        let l2 = dot3(l, l);
        let cl = dot3(c, l);
        let tau = (-cl / l2).clamp(0.0, 1.0);
        let near = [c[0] + tau * l[0], c[1] + tau * l[1], c[2] + tau * l[2]];
        if dot3(near, near) < on_tol * on_tol {
            return Err(Error::Domain(format!(
                "evaluation point lies on the curve (segment {k})"
            )));
        }
        let c2 = dot3(c, c);
        let cperp2 = c2 - cl * cl / l2;
        if cperp2 <= 1e-20 * (c2 + l2) {
            // collinear with the segment's line but outside the segment: the
            // exact contribution vanishes, and the closed form is 0/0 there
            continue;
        }
        let bp = [c[0] + l[0], c[1] + l[1], c[2] + l[2]];
        let factor = ((l2 + cl) / norm3(bp) - cl / c2.sqrt()) / (l2 * cperp2);
        let cl_cross = cross3(c, l);
        for i in 0..3 {
            x[i] += 0.5 * factor * cl_cross[i];
        }
    }
    Ok(x)
}

/// Leading near-field approximation of the Biot-Savart field: with `q` the
/// nearest point of the curve to `p` and `t` the unit tangent there,
/// `(q - p) / |q - p|^2 x t`, a field of magnitude exactly `1/dist`
/// perpendicular to both the offset and the tangent.
///
/// Errors if the nearest-point projection is ambiguous (several distinct
/// curve points at essentially the minimal distance, e.g. at the center of a
/// circle) or lands on a corner where the tangent is discontinuous.
pub fn biot_savart_nearfield(curve: &ClosedCurve3D, p: [f64; 3]) -> Result<[f64; 3]> {
    let pts = curve.points();
    let n = pts.len();
    let scale = curve.coordinate_scale().max(norm3(p));
    let mut best_d2 = f64::INFINITY;
    let mut candidates: Vec<([f64; 3], [f64; 3], f64)> = Vec::new(); // (q, tangent, d2)
    for k in 0..n {
        let a = pts[k];
        let b = pts[(k + 1) % n];
        let l = sub3(b, a);
        let l2 = dot3(l, l);
        let ap = sub3(p, a);
        let tau = (dot3(ap, l) / l2).clamp(0.0, 1.0);
        let q = [a[0] + tau * l[0], a[1] + tau * l[1], a[2] + tau * l[2]];
        let d2 = dot3(sub3(p, q), sub3(p, q));
        let ln = l2.sqrt();
        let tangent = [l[0] / ln, l[1] / ln, l[2] / ln];
        candidates.push((q, tangent, d2));
        best_d2 = best_d2.min(d2);
    }
    let best_d = best_d2.sqrt();
    if best_d <= 1e-12 * (1.0 + scale) {
        return Err(Error::Domain("evaluation point lies on the curve".into()));
    }
    // gather everything within a whisker of optimal and demand one consistent
    // nearest point with one consistent tangent
    let d_tol = best_d * (1.0 + 1e-9) + 1e-12 * (1.0 + scale);
    let mut q_star: Option<[f64; 3]> = None;
    let mut t_star: Option<[f64; 3]> = None;
    let pos_tol = (1e-9 * (1.0 + scale)).max(1e-6 * best_d);
    for (q, t, d2) in candidates {
        if d2.sqrt() > d_tol {
            continue;
        }
        match (&q_star, &t_star) {
            (None, _) => {
                q_star = Some(q);
                t_star = Some(t);
            }
            (Some(q0), Some(t0)) => {
                if norm3(sub3(q, *q0)) > pos_tol {
                    return Err(Error::Domain(
                        "nearest point on the curve is ambiguous".into(),
                    ));
                }
                if norm3(sub3(t, *t0)) > 1e-8 {
                    return Err(Error::Domain(
                        "nearest point sits on a corner of the curve".into(),
                    ));
                }
            }
            _ => unreachable!(),
        }
    }
    let q = q_star.unwrap();
    let t = t_star.unwrap();
    let offset = sub3(q, p);
    let d2 = dot3(offset, offset);
    Ok(cross3([offset[0] / d2, offset[1] / d2, offset[2] / d2], t))
}

/// Circulation of the Biot-Savart field of `curve` along the closed polyline
/// `loop_curve`, by the trapezoid rule on the loop's vertices. For a loop
/// linking the curve once transversally this converges to `2 pi` times the
/// linking sign.
pub fn biot_savart_circulation(curve: &ClosedCurve3D, loop_curve: &ClosedCurve3D) -> Result<f64> {
    let pts = loop_curve.points();
    let n = pts.len();
    let fields: Vec<[f64; 3]> = pts
        .iter()
        .map(|&p| biot_savart_eval(curve, p))
        .collect::<Result<_>>()?;
    let mut circ = 0.0;
    for k in 0..n {
        let kp = (k + 1) % n;
        let dl = sub3(pts[kp], pts[k]);
        let avg = [
            0.5 * (fields[k][0] + fields[kp][0]),
            0.5 * (fields[k][1] + fields[kp][1]),
            0.5 * (fields[k][2] + fields[kp][2]),
        ];
        circ += dot3(avg, dl);
    }
    Ok(circ)
}

// ---------------------------------------------------------------------------
// domain constant from the regularised field energy

/// Quadrature resolution and physics options for [`c_omega_estimate`].
#[derive(Clone, Debug)]
pub struct COmegaOptions {
    /// Filament multiplicity; the field and hence the energy density scale
    /// with its square.
    pub multiplicity: f64,
    /// Number of azimuthal trapezoid points.
    pub theta_nodes: usize,
    /// Number of Gauss points along the axis of the ball.
    pub z_nodes: usize,
    /// Gauss points per radial panel; panels grow geometrically from the
    /// cutoff radius outwards, resolving the near-axis `1/R^2` profile.
    pub radial_gauss: usize,
}

impl Default for COmegaOptions {
    fn default() -> Self {
        COmegaOptions {
            multiplicity: 1.0,
            theta_nodes: 32,
            z_nodes: 24,
            radial_gauss: 8,
        }
    }
}

/// One cutoff radius worth of output from [`c_omega_estimate`].
#[derive(Clone, Copy, Debug)]
pub struct COmegaRow {
    pub rho_cut: f64,
    /// Regularised field energy `1/2 int |m X|^2` over the ball minus the
    /// cutoff cylinder around the axis.
    pub energy: f64,
    /// The counterterm `pi m^2 L0 ln(rho_cut)` that cancels the logarithmic
    /// growth of the excised energy.
    pub counterterm: f64,
    /// `energy + counterterm`; converges linearly in the cutoff radius.
    pub sum: f64,
}

/// Output of [`c_omega_estimate`].
#[derive(Clone, Debug)]
pub struct COmegaReport {
    pub rows: Vec<COmegaRow>,
    /// Linear-in-cutoff extrapolation of the last two sums to zero cutoff.
    pub extrapolated: f64,
    /// Whether the successive sum differences shrank monotonically.
    pub converged: bool,
}

/// Estimates the finite part of the field energy of a filament curve inside
/// a ball domain: for each cutoff radius, integrates `1/2 |m X|^2` over the
/// ball minus the axis-aligned cylinder of that radius (the curve must cross
/// the ball inside that cylinder, e.g. straight along the axis), adds the
/// logarithmic counterterm, and extrapolates the cutoff to zero.
///
/// `rho_cuts` must be strictly decreasing; at least three values are needed
/// to judge convergence. Errors with the non-convergence variant if the sum
/// differences grow instead of shrink.
pub fn c_omega_estimate(
    ball: &BallGeometry,
    curve: &ClosedCurve3D,
    rho_cuts: &[f64],
    opts: &COmegaOptions,
) -> Result<COmegaReport> {
    if rho_cuts.len() < 3 {
        return Err(Error::Argument(format!(
            "need at least 3 cutoff radii to extrapolate, got {}",
            rho_cuts.len()
        )));
    }
    for w in rho_cuts.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Argument("cutoff radii must be strictly decreasing".into()));
        }
    }
    if !(rho_cuts[0] < ball.rho) || !(rho_cuts[rho_cuts.len() - 1] > 0.0) {
        return Err(Error::Argument(format!(
            "cutoff radii must lie strictly between 0 and the ball radius {}",
            ball.rho
        )));
    }
    let m = opts.multiplicity;
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::Argument(format!("multiplicity must be at least 1, got {m}")));
    }
    if opts.theta_nodes < 8 || opts.z_nodes < 8 || opts.radial_gauss < 4 {
        return Err(Error::Argument(
            "quadrature options too coarse: need theta >= 8, z >= 8, radial >= 4".into(),
        ));
    }
    let l0 = ball.axis_length();
    let mut rows = Vec::with_capacity(rho_cuts.len());
    for &rc in rho_cuts {
        let energy = m * m * field_energy_outside_cylinder(ball, curve, rc, opts)?;
        let counterterm = std::f64::consts::PI * m * m * l0 * rc.ln();
        rows.push(COmegaRow {
            rho_cut: rc,
            energy,
            counterterm,
            sum: energy + counterterm,
        });
    }
    let diffs: Vec<f64> = rows.windows(2).map(|w| w[1].sum - w[0].sum).collect();
    let mut converged = true;
    for w in diffs.windows(2) {
        if w[1].abs() > w[0].abs() {
            converged = false;
        }
    }
    if !converged {
        let sums: Vec<f64> = rows.iter().map(|r| r.sum).collect();
        return Err(Error::NonConvergence(format!(
            "regularised energy sums did not stabilise as the cutoff shrank: {sums:?}"
        )));
    }
    // sums behave like S* + const * rho_cut; extrapolate the last two linearly
    let r1 = &rows[rows.len() - 2];
    let r2 = &rows[rows.len() - 1];
    let extrapolated = (r2.sum * r1.rho_cut - r1.sum * r2.rho_cut) / (r1.rho_cut - r2.rho_cut);
    Ok(COmegaReport {
        rows,
        extrapolated,
        converged,
    })
}

fn field_energy_outside_cylinder(
    ball: &BallGeometry,
    curve: &ClosedCurve3D,
    rho_cut: f64,
    opts: &COmegaOptions,
) -> Result<f64> {
    use rayon::prelude::*;
    let rho_b = ball.rho;
    let (zt, zw) = gauss_legendre(opts.z_nodes);
    let (rt, rw) = gauss_legendre(opts.radial_gauss);
    let n_theta = opts.theta_nodes;
    let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
    let z_items: Vec<(f64, f64)> = zt
        .iter()
        .zip(&zw)
        .map(|(t, w)| (rho_b * t, rho_b * w))
        .collect();
    let partials: Result<Vec<f64>> = crate::thread_pool().install(|| {
        z_items
            .par_iter()
            .map(|&(z, wz)| -> Result<f64> {
                let rmax = (rho_b * rho_b - z * z).max(0.0).sqrt();
                if rmax <= rho_cut * (1.0 + 1e-12) {
                    return Ok(0.0);
                }
                let mut acc = 0.0;
                let mut r_lo = rho_cut;
                while r_lo < rmax {
                    let r_hi = (2.0 * r_lo).min(rmax);
                    for (t, w) in rt.iter().zip(&rw) {
                        let r = 0.5 * (r_lo + r_hi) + 0.5 * (r_hi - r_lo) * t;
                        let wr = 0.5 * (r_hi - r_lo) * w;
                        let mut theta_sum = 0.0;
                        for i in 0..n_theta {
                            let th = dtheta * i as f64;
                            let p = [r * th.cos(), r * th.sin(), z];
                            let x = biot_savart_eval(curve, p)?;
                            theta_sum += dot3(x, x);
                        }
                        acc += wr * r * theta_sum * dtheta;
                    }
                    r_lo = r_hi;
                }
                Ok(acc * wz)
            })
            .collect()
    });
    // combine in index order so the thread count cannot change the result
    Ok(0.5 * partials?.iter().sum::<f64>())
}

/// The standard test filament for the domain-constant estimator on a ball:
/// straight through the ball along its axis, overshooting each pole by
/// `margin`, closed by a semicircular return arc of radius `rho + margin`
/// in the xz-plane, discretised with `arc_segments` chords.
pub fn axis_return_curve(
    ball: &BallGeometry,
    margin: f64,
    arc_segments: usize,
) -> Result<ClosedCurve3D> {
    if !(margin > 0.0) || !margin.is_finite() {
        return Err(Error::Argument(format!(
            "axis overshoot margin must be positive, got {margin}"
        )));
    }
    if arc_segments < 8 {
        return Err(Error::Argument(format!(
            "need at least 8 return-arc segments, got {arc_segments}"
        )));
    }
    let half = ball.rho + margin;
    let mut points = vec![[0.0, 0.0, -half], [0.0, 0.0, half]];
    for k in 1..arc_segments {
        let phi = std::f64::consts::PI * k as f64 / arc_segments as f64;
        points.push([half * phi.sin(), 0.0, half * phi.cos()]);
    }
    ClosedCurve3D::new(points)
}
