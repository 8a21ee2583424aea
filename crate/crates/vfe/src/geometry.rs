//! Tubular charts around a filament axis and length functionals on
//! graph-type curves.
//!
//! A tube chart straightens a candidate filament into the segment
//! `{u = 0, s in [0, L0]}` of coordinates `(u1, u2, s)` in which the ambient
//! metric is block diagonal: a 2x2 transverse block `g_perp(u, s)`, a scalar
//! `g33(u, s)`, and no cross terms. The closed ball of radius `rho` admits a
//! fully explicit chart of this kind built from a Mobius transform of the
//! meridian disk; it is the analytic test geometry used throughout the crate.

use crate::{Error, Result};
use std::sync::Arc;

/// Block-diagonal metric data of a tube chart at one point.
#[derive(Clone, Copy, Debug)]
pub struct MetricBlocks {
    /// Transverse 2x2 block, symmetric positive definite.
    pub g_perp: [[f64; 2]; 2],
    /// Axial coefficient; equals 1 on the axis.
    pub g33: f64,
}

/// First derivatives of the metric blocks with respect to the transverse
/// coordinates. Index `i` is the direction `u_i`.
#[derive(Clone, Copy, Debug)]
pub struct MetricGrad {
    pub dg_perp: [[[f64; 2]; 2]; 2],
    pub dg33: [f64; 2],
}

/// A tubular coordinate chart with block-diagonal metric.
///
/// Contract: `g13 = g23 = 0` identically, `g33(0, s) = 1` (the axis is
/// parametrized by arclength), and the transverse block is SPD on
/// `{|u| < delta}`.
pub trait TubeChart: Send + Sync {
    /// Arclength of the axis.
    fn l0(&self) -> f64;

    /// Transverse radius of the chart domain.
    fn delta(&self) -> f64;

    /// Metric blocks at `(u, s)`. Errors if `(u, s)` leaves the domain.
    fn metric(&self, u: [f64; 2], s: f64) -> Result<MetricBlocks>;

    /// Ambient image of a chart point, when the chart knows its embedding.
    fn chart_map(&self, u: [f64; 2], s: f64) -> Result<[f64; 3]> {
        let _ = (u, s);
        Err(Error::Argument(
            "this chart does not carry an ambient embedding".into(),
        ))
    }

    /// Transverse derivative of the metric blocks. The default is a central
    /// finite difference; analytic charts should override it.
    fn metric_grad_u(&self, u: [f64; 2], s: f64) -> Result<MetricGrad> {
        let h = 1e-6;
        let mut out = MetricGrad {
            dg_perp: [[[0.0; 2]; 2]; 2],
            dg33: [0.0; 2],
        };
        for i in 0..2 {
            let mut up = u;
            let mut um = u;
            up[i] += h;
            um[i] -= h;
            let mp = self.metric(up, s)?;
            let mm = self.metric(um, s)?;
            for a in 0..2 {
                for b in 0..2 {
                    out.dg_perp[i][a][b] = (mp.g_perp[a][b] - mm.g_perp[a][b]) / (2.0 * h);
                }
            }
            out.dg33[i] = (mp.g33 - mm.g33) / (2.0 * h);
        }
        Ok(out)
    }
}

/// The explicit tube chart of the closed ball of radius `rho`.
///
/// The meridian half-disk is parametrized by Mobius coordinates `(x, z)`,
///
/// ```text
/// R = rho x (1 + z^2) / (1 + x^2 z^2),   Z = rho z (1 - x^2) / (1 + x^2 z^2),
/// ```
///
/// rotated around the Z axis with angle `theta`; the chart coordinates are
/// `u = x (cos theta, sin theta)` and the axis arclength `s = rho (z + 1)`,
/// so the diameter `x = 0` becomes the axis with `L0 = 2 rho` and `g33 = 1`
/// along it. In these coordinates the metric is exactly block diagonal:
///
/// ```text
/// g_perp = rho^2 (1+z^2)^2 / (1 + |u|^2 z^2)^2 * Id,
/// g33    = (1 - |u|^2)^2 / (1 + |u|^2 z^2)^2.
/// ```
#[derive(Clone, Copy, Debug)]
pub struct BallChart {
    rho: f64,
    delta: f64,
}

impl BallChart {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("ball radius must be positive, got {rho}")));
        }
        // The chart formulas degenerate at |u| = 1; stay well inside.
        Ok(BallChart { rho, delta: 0.9 })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Mobius vertical coordinate of the arclength parameter.
    #[inline]
    pub fn z_of_s(&self, s: f64) -> f64 {
        s / self.rho - 1.0
    }

    /// Meridian map `(x, z) -> (R, Z)` in the plane containing the axis.
    pub fn meridian_map(&self, x: f64, z: f64) -> (f64, f64) {
        let d = 1.0 + x * x * z * z;
        let r = self.rho * x * (1.0 + z * z) / d;
        let zz = self.rho * z * (1.0 - x * x) / d;
        (r, zz)
    }

    fn check_domain(&self, u: [f64; 2], s: f64) -> Result<()> {
        let x2 = u[0] * u[0] + u[1] * u[1];
        if !(x2.is_finite() && s.is_finite()) {
            return Err(Error::Domain("non-finite chart point".into()));
        }
        if x2 >= self.delta * self.delta {
            return Err(Error::Domain(format!(
                "transverse displacement |u| = {:.6} exceeds the chart radius {}",
                x2.sqrt(),
                self.delta
            )));
        }
        let tol = 1e-12 * self.l0().max(1.0);
        if s < -tol || s > self.l0() + tol {
            return Err(Error::Domain(format!(
                "axial coordinate s = {s} outside [0, {}]",
                self.l0()
            )));
        }
        Ok(())
    }
}

impl TubeChart for BallChart {
    fn l0(&self) -> f64 {
        2.0 * self.rho
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn metric(&self, u: [f64; 2], s: f64) -> Result<MetricBlocks> {
        self.check_domain(u, s)?;
        let z = self.z_of_s(s);
        let x2 = u[0] * u[0] + u[1] * u[1];
        let d = 1.0 + x2 * z * z;
        let a = self.rho * (1.0 + z * z) / d;
        let gp = a * a;
        let g33 = (1.0 - x2) * (1.0 - x2) / (d * d);
        Ok(MetricBlocks {
            g_perp: [[gp, 0.0], [0.0, gp]],
            g33,
        })
    }

    fn chart_map(&self, u: [f64; 2], s: f64) -> Result<[f64; 3]> {
        self.check_domain(u, s)?;
        let z = self.z_of_s(s);
        let x2 = u[0] * u[0] + u[1] * u[1];
        let d = 1.0 + x2 * z * z;
        let m = self.rho * (1.0 + z * z) / d;
        Ok([m * u[0], m * u[1], self.rho * z * (1.0 - x2) / d])
    }

    fn metric_grad_u(&self, u: [f64; 2], s: f64) -> Result<MetricGrad> {
        self.check_domain(u, s)?;
        let z = self.z_of_s(s);
        let x2 = u[0] * u[0] + u[1] * u[1];
        let d = 1.0 + x2 * z * z;
        let a = self.rho * (1.0 + z * z) / d;
        // d(g_perp)/d(x^2) = -2 z^2 a^2 / d, d(g33)/d(x^2) = -2(1-x^2)(1+z^2)/d^3
        let dgp_dx2 = -2.0 * z * z * a * a / d;
        let dg33_dx2 = -2.0 * (1.0 - x2) * (1.0 + z * z) / (d * d * d);
        let mut out = MetricGrad {
            dg_perp: [[[0.0; 2]; 2]; 2],
            dg33: [0.0; 2],
        };
        for i in 0..2 {
            let c = 2.0 * u[i];
            out.dg_perp[i][0][0] = dgp_dx2 * c;
            out.dg_perp[i][1][1] = dgp_dx2 * c;
            out.dg33[i] = dg33_dx2 * c;
        }
        Ok(out)
    }
}

/// A ball-shaped sample domain, described by its radius alone. Used by the
/// field-energy routines that integrate over the domain itself rather than
/// over a tubular chart.
#[derive(Clone, Copy, Debug)]
pub struct BallGeometry {
    pub rho: f64,
}

impl BallGeometry {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("ball radius must be positive, got {rho}")));
        }
        Ok(BallGeometry { rho })
    }

    /// Diameter of the ball, i.e. the axis length of its tube chart.
    pub fn axis_length(&self) -> f64 {
        2.0 * self.rho
    }
}

/// Taylor data of the axial metric coefficient along the axis: the
/// transverse metric `g_perp(s)` restricted to `u = 0`, and the first and
/// second transverse derivatives of `g33` there.
#[derive(Clone)]
pub struct AxisJet {
    l0: f64,
    g_perp: Arc<dyn Fn(f64) -> [[f64; 2]; 2] + Send + Sync>,
    dg33: Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>,
    d2g33: Arc<dyn Fn(f64) -> [[f64; 2]; 2] + Send + Sync>,
}

impl AxisJet {
    /// Exact jet of the ball chart:
    /// `g_perp = rho^2 (1+z^2)^2 Id`, `dg33 = 0`,
    /// `d2g33(u, u) = -4 (1+z^2) |u|^2` with `z = s/rho - 1`.
    pub fn ball(rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("ball radius must be positive, got {rho}")));
        }
        Ok(AxisJet {
            l0: 2.0 * rho,
            g_perp: Arc::new(move |s| {
                let z = s / rho - 1.0;
                let a = rho * (1.0 + z * z);
                [[a * a, 0.0], [0.0, a * a]]
            }),
            dg33: Arc::new(|_s| [0.0, 0.0]),
            d2g33: Arc::new(move |s| {
                let z = s / rho - 1.0;
                let c = -4.0 * (1.0 + z * z);
                [[c, 0.0], [0.0, c]]
            }),
        })
    }

    /// Jet built from explicit closures. Handy for synthetic model problems
    /// where the metric data is prescribed rather than derived from a chart.
    pub fn from_closures(
        l0: f64,
        g_perp: impl Fn(f64) -> [[f64; 2]; 2] + Send + Sync + 'static,
        dg33: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static,
        d2g33: impl Fn(f64) -> [[f64; 2]; 2] + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(l0 > 0.0) || !l0.is_finite() {
            return Err(Error::Argument(format!("axis length must be positive, got {l0}")));
        }
        Ok(AxisJet {
            l0,
            g_perp: Arc::new(g_perp),
            dg33: Arc::new(dg33),
            d2g33: Arc::new(d2g33),
        })
    }

    /// Jet assembled by central finite differences of an arbitrary chart's
    /// metric; `step` around 1e-5 balances truncation and rounding for the
    /// first-order data, the second-order data uses a wider 1e-3-scale step
    /// internally.
    pub fn from_chart(chart: Arc<dyn TubeChart>, step: f64) -> Self {
        let l0 = chart.l0();
        let c1 = Arc::clone(&chart);
        let c2 = Arc::clone(&chart);
        let c3 = chart;
        let h2 = step.max(1e-4).max(step.sqrt() * 1e-2); // second-difference step
        AxisJet {
            l0,
            g_perp: Arc::new(move |s| {
                c1.metric([0.0, 0.0], s).map(|m| m.g_perp).unwrap_or([[f64::NAN; 2]; 2])
            }),
            dg33: Arc::new(move |s| {
                let mut out = [0.0; 2];
                for i in 0..2 {
                    let mut up = [0.0, 0.0];
                    let mut um = [0.0, 0.0];
                    up[i] = step;
                    um[i] = -step;
                    let gp = c2.metric(up, s).map(|m| m.g33).unwrap_or(f64::NAN);
                    let gm = c2.metric(um, s).map(|m| m.g33).unwrap_or(f64::NAN);
                    out[i] = (gp - gm) / (2.0 * step);
                }
                out
            }),
            d2g33: Arc::new(move |s| {
                let g0 = c3.metric([0.0, 0.0], s).map(|m| m.g33).unwrap_or(f64::NAN);
                let gat = |u: [f64; 2]| c3.metric(u, s).map(|m| m.g33).unwrap_or(f64::NAN);
                let dxx = (gat([h2, 0.0]) + gat([-h2, 0.0]) - 2.0 * g0) / (h2 * h2);
                let dyy = (gat([0.0, h2]) + gat([0.0, -h2]) - 2.0 * g0) / (h2 * h2);
                let dxy = (gat([h2, h2]) + gat([-h2, -h2]) - gat([h2, -h2]) - gat([-h2, h2]))
                    / (4.0 * h2 * h2);
                [[dxx, dxy], [dxy, dyy]]
            }),
        }
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn g_perp(&self, s: f64) -> [[f64; 2]; 2] {
        (self.g_perp)(s)
    }

    /// Covector `u -> (d g33)(u)` on the axis.
    pub fn dg33(&self, s: f64) -> [f64; 2] {
        (self.dg33)(s)
    }

    /// Symmetric matrix `M` with `(d^2 g33)(u, u) = u^T M u` on the axis.
    pub fn d2g33(&self, s: f64) -> [[f64; 2]; 2] {
        (self.d2g33)(s)
    }
}

/// A graph-type curve in chart coordinates: transverse displacements
/// sampled on a strictly increasing axial grid spanning `[0, L0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGraph {
    z_nodes: Vec<f64>,
    u_values: Vec<[f64; 2]>,
}

impl SampledGraph {
    pub fn new(z_nodes: Vec<f64>, u_values: Vec<[f64; 2]>) -> Result<Self> {
        if z_nodes.len() < 2 {
            return Err(Error::Argument("a sampled graph needs at least 2 nodes".into()));
        }
        if z_nodes.len() != u_values.len() {
            return Err(Error::Argument(format!(
                "grid/value length mismatch: {} nodes vs {} values",
                z_nodes.len(),
                u_values.len()
            )));
        }
        if z_nodes[0].abs() > 1e-12 * z_nodes[z_nodes.len() - 1].abs().max(1.0) {
            return Err(Error::Argument(format!(
                "grid must start at 0, got {}",
                z_nodes[0]
            )));
        }
        for k in 1..z_nodes.len() {
            if !(z_nodes[k] > z_nodes[k - 1]) {
                return Err(Error::Argument(format!(
                    "grid not strictly increasing at index {k}"
                )));
            }
        }
        if u_values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite displacement value".into()));
        }
        Ok(SampledGraph { z_nodes, u_values })
    }

    /// Uniform grid of `m + 1` nodes on `[0, l0]` with `u = f(s)`.
    pub fn uniform(l0: f64, m: usize, f: impl Fn(f64) -> [f64; 2]) -> Self {
        assert!(m >= 1 && l0 > 0.0);
        let z_nodes: Vec<f64> = (0..=m).map(|k| l0 * k as f64 / m as f64).collect();
        let u_values = z_nodes.iter().map(|&s| f(s)).collect();
        SampledGraph { z_nodes, u_values }
    }

    /// The axis itself.
    pub fn zero(l0: f64, m: usize) -> Self {
        Self::uniform(l0, m, |_| [0.0, 0.0])
    }

    pub fn z_nodes(&self) -> &[f64] {
        &self.z_nodes
    }

    pub fn u_values(&self) -> &[[f64; 2]] {
        &self.u_values
    }

    pub fn len(&self) -> usize {
        self.z_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same grid, displacements scaled by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        SampledGraph {
            z_nodes: self.z_nodes.clone(),
            u_values: self.u_values.iter().map(|u| [t * u[0], t * u[1]]).collect(),
        }
    }

    pub fn max_displacement(&self) -> f64 {
        self.u_values
            .iter()
            .map(|u| (u[0] * u[0] + u[1] * u[1]).sqrt())
            .fold(0.0, f64::max)
    }

    pub(crate) fn set_u(&mut self, k: usize, u: [f64; 2]) {
        self.u_values[k] = u;
    }
}

pub(crate) fn check_span(curve: &SampledGraph, l0: f64) -> Result<()> {
    let last = *curve.z_nodes().last().unwrap();
    if (last - l0).abs() > 1e-9 * l0.max(1.0) {
        return Err(Error::Argument(format!(
            "curve grid ends at {last} but the chart axis has length {l0}"
        )));
    }
    Ok(())
}

/// Length of a graph curve: trapezoid quadrature of
/// `sqrt(g33(u, s) + |u'|^2_{g_perp(u, s)})` with piecewise-linear `u`.
pub fn curve_length(curve: &SampledGraph, chart: &dyn TubeChart) -> Result<f64> {
    curve_length_scaled(curve, chart, 1.0)
}

/// Length in the anisotropically scaled metric `g33 dz^2 + ell^{-2} g_perp`;
/// `ell = 1` is the plain length. Shared so that identities relating the two
/// hold to rounding.
pub fn curve_length_scaled(curve: &SampledGraph, chart: &dyn TubeChart, ell: f64) -> Result<f64> {
    if !(ell > 0.0) {
        return Err(Error::Argument(format!("scale ell must be positive, got {ell}")));
    }
    check_span(curve, chart.l0())?;
    let inv2 = 1.0 / (ell * ell);
    let z = curve.z_nodes();
    let u = curve.u_values();
    let mut acc = 0.0;
    for k in 0..z.len() - 1 {
        let h = z[k + 1] - z[k];
        let v = [(u[k + 1][0] - u[k][0]) / h, (u[k + 1][1] - u[k][1]) / h];
        let f = |uu: [f64; 2], s: f64| -> Result<f64> {
            let m = chart.metric(uu, s).map_err(|e| match e {
                Error::Domain(msg) => Error::Domain(format!("at node near s = {s}: {msg}")),
                other => other,
            })?;
            let quad = v[0] * (m.g_perp[0][0] * v[0] + m.g_perp[0][1] * v[1])
                + v[1] * (m.g_perp[1][0] * v[0] + m.g_perp[1][1] * v[1]);
            Ok((m.g33 + inv2 * quad).sqrt())
        };
        acc += 0.5 * h * (f(u[k], z[k])? + f(u[k + 1], z[k + 1])?);
    }
    Ok(acc)
}

/// Projected length `int sqrt(g33(u(s), s)) ds` (no transverse kinetic term).
pub fn projected_length(curve: &SampledGraph, chart: &dyn TubeChart) -> Result<f64> {
    check_span(curve, chart.l0())?;
    let z = curve.z_nodes();
    let u = curve.u_values();
    let mut vals = Vec::with_capacity(z.len());
    for k in 0..z.len() {
        vals.push(chart.metric(u[k], z[k])?.g33.sqrt());
    }
    Ok(crate::quad::trapezoid(z, &vals))
}

/// Gradient of `curve_length` with respect to every node displacement.
pub fn curve_length_gradient(curve: &SampledGraph, chart: &dyn TubeChart) -> Result<Vec<[f64; 2]>> {
    check_span(curve, chart.l0())?;
    let z = curve.z_nodes();
    let u = curve.u_values();
    let n = z.len();
    let mut grad = vec![[0.0; 2]; n];
    for k in 0..n - 1 {
        let h = z[k + 1] - z[k];
        let v = [(u[k + 1][0] - u[k][0]) / h, (u[k + 1][1] - u[k][1]) / h];
        // trapezoid endpoint terms of this element
        for (side, (uu, s)) in [(0usize, (u[k], z[k])), (1, (u[k + 1], z[k + 1]))] {
            let m = chart.metric(uu, s)?;
            let gm = chart.metric_grad_u(uu, s)?;
            let gv = [
                m.g_perp[0][0] * v[0] + m.g_perp[0][1] * v[1],
                m.g_perp[1][0] * v[0] + m.g_perp[1][1] * v[1],
            ];
            let f = (m.g33 + v[0] * gv[0] + v[1] * gv[1]).sqrt();
            let w = 0.5 * h / (2.0 * f);
            // point dependence: metric varies with the endpoint's u
            let node = k + side;
            for i in 0..2 {
                let dquad = v[0] * (gm.dg_perp[i][0][0] * v[0] + gm.dg_perp[i][0][1] * v[1])
                    + v[1] * (gm.dg_perp[i][1][0] * v[0] + gm.dg_perp[i][1][1] * v[1]);
                grad[node][i] += w * (gm.dg33[i] + dquad);
            }
            // slope dependence: v couples both endpoints of the element
            for i in 0..2 {
                let dvi = 2.0 * gv[i] * w / h;
                grad[k][i] -= dvi;
                grad[k + 1][i] += dvi;
            }
        }
    }
    Ok(grad)
}

/// Second variation of the ball length along a meridian-coordinate path:
/// the `t^2` coefficient of `t -> length` of the family `x = t x(z)`,
/// `theta = theta(z)`,
///
/// ```text
/// rho * int_{-1}^{1} x'^2 (1+z^2)^2 / 2 - x^2 (1+z^2)
///                    + x^2 theta'^2 (1+z^2)^2 / 2  dz .
/// ```
///
/// The second derivative of the length in `t` is twice this value.
pub fn length_second_variation_ball(
    z_grid: &[f64],
    x_path: &[f64],
    theta_path: &[f64],
    rho: f64,
) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive, got {rho}")));
    }
    if z_grid.len() != x_path.len() || z_grid.len() != theta_path.len() {
        return Err(Error::Argument(format!(
            "paths must share one grid: {} z-nodes, {} x-values, {} theta-values",
            z_grid.len(),
            x_path.len(),
            theta_path.len()
        )));
    }
    if z_grid.len() < 2 {
        return Err(Error::Argument("need at least 2 grid nodes".into()));
    }
    let mut acc = 0.0;
    for k in 0..z_grid.len() - 1 {
        let h = z_grid[k + 1] - z_grid[k];
        if !(h > 0.0) {
            return Err(Error::Argument(format!("grid not increasing at index {k}")));
        }
        let zm = 0.5 * (z_grid[k] + z_grid[k + 1]);
        let xm = 0.5 * (x_path[k] + x_path[k + 1]);
        let xp = (x_path[k + 1] - x_path[k]) / h;
        let tp = (theta_path[k + 1] - theta_path[k]) / h;
        let w = 1.0 + zm * zm;
        acc += h * (0.5 * xp * xp * w * w - xm * xm * w + 0.5 * xm * xm * w * w * tp * tp);
    }
    Ok(rho * acc)
}
