//! The flux-to-length ratio of filament curves, its second variation about
//! the axis (the quadratic form `Q`), spectral nondegeneracy checks, and
//! ratio maximisation over graph curves.
//!
//! Everything here works on displacements `u(s)` of the axis expressed in a
//! tube chart. The ratio itself is implemented for the ball, where the flux
//! of the Meissner curl through the swept meridian surface is available in
//! closed form; the quadratic form and its spectrum only need the second
//! order jets of the metric and the field along the axis, so they accept
//! arbitrary jets.

use nalgebra::DMatrix;

use crate::fields::{
    flux_difference, flux_difference_gradient, flux_gamma0_ball, FieldJet,
};
use crate::geometry::{
    check_span, curve_length, curve_length_gradient, curve_length_scaled, projected_length,
    AxisJet, BallChart, SampledGraph, TubeChart,
};
use crate::opt;
use crate::quad::{gauss_legendre, uniform_grid};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// the quadratic form Q

/// Everything needed to evaluate the second variation of the flux-to-length
/// ratio about the axis: metric jets, field jets, and the axis ratio `r0`.
///
/// For a displacement `u` the form is
///
/// ```text
/// Q(u) = (2 r0 / l0) * [ L2(u) - B2(u) / r0 ],
/// ```
///
/// where `L2` is the second variation of length (transverse kinetic energy
/// plus the curvature potential of `g33`) and `B2` the second variation of
/// the flux. `Q(u)` equals minus the second derivative of the ratio along
/// `t -> t u`, so positivity of `Q` is exactly strict maximality of the
/// ratio at the axis.
#[derive(Clone)]
pub struct QFormSpec {
    axis: AxisJet,
    field: FieldJet,
    r0: f64,
    l0: f64,
}

impl QFormSpec {
    pub fn from_jets(axis: AxisJet, field: FieldJet, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::Argument(format!("axis ratio must be positive, got {r0}")));
        }
        let l0 = axis.l0();
        if (field.l0() - l0).abs() > 1e-12 * l0.max(1.0) {
            return Err(Error::Argument(format!(
                "metric and field jets disagree on the axis length: {l0} vs {}",
                field.l0()
            )));
        }
        Ok(QFormSpec { axis, field, r0, l0 })
    }

    /// Exact jets of the ball of radius `rho`, with `r0` computed from the
    /// Meissner flux.
    pub fn ball(rho: f64) -> Result<Self> {
        let axis = AxisJet::ball(rho)?;
        let field = FieldJet::ball(rho)?;
        let r0 = flux_gamma0_ball(rho)? / (2.0 * rho);
        QFormSpec::from_jets(axis, field, r0)
    }

    /// Synthetic isotropic model on a unit axis: flat transverse metric,
    /// curvature potential `|u|^2 / 2`, no field, `r0 = 1/2` so the global
    /// prefactor is one. For a constant displacement `Q(u) = |u|^2 / 2`.
    pub fn synthetic_isotropic() -> Self {
        let axis = AxisJet::from_closures(
            1.0,
            |_| [[1.0, 0.0], [0.0, 1.0]],
            |_| [0.0; 2],
            |_| [[2.0, 0.0], [0.0, 2.0]],
        )
        .unwrap();
        let field = FieldJet::zero(1.0).unwrap();
        QFormSpec {
            axis,
            field,
            r0: 0.5,
            l0: 1.0,
        }
    }

    /// Flat transverse metric and nothing else: `Q` is the plain Dirichlet
    /// energy of `u`, vanishing exactly on constants.
    pub fn pure_kinetic(l0: f64) -> Result<Self> {
        let axis = AxisJet::from_closures(
            l0,
            |_| [[1.0, 0.0], [0.0, 1.0]],
            |_| [0.0; 2],
            |_| [[0.0; 2]; 2],
        )?;
        let field = FieldJet::zero(l0)?;
        QFormSpec::from_jets(axis, field, l0 / 2.0)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn axis(&self) -> &AxisJet {
        &self.axis
    }

    pub fn field(&self) -> &FieldJet {
        &self.field
    }

    /// The curvature-potential matrix of the length variation at `s`:
    /// `A = d2g33/4 - dg33 (x) dg33 / 8`.
    fn length_potential(&self, s: f64) -> [[f64; 2]; 2] {
        let d2 = self.axis.d2g33(s);
        let d1 = self.axis.dg33(s);
        let mut a = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                a[i][j] = 0.25 * d2[i][j] - 0.125 * d1[i] * d1[j];
            }
        }
        a
    }

    /// Full nodal potential of `Q` (before the global prefactor):
    /// `A(s) - M(s) / (2 r0)`.
    fn nodal_potential(&self, s: f64) -> [[f64; 2]; 2] {
        let a = self.length_potential(s);
        let m = self.field.quad(s);
        let inv = 1.0 / (2.0 * self.r0);
        let mut p = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] = a[i][j] - inv * m[i][j];
            }
        }
        p
    }
}

#[inline]
pub(crate) fn quad_at(m: &[[f64; 2]; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * (m[0][0] * b[0] + m[0][1] * b[1]) + a[1] * (m[1][0] * b[0] + m[1][1] * b[1])
}

#[inline]
fn avg_mat(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [0.5 * (a[0][0] + b[0][0]), 0.5 * (a[0][1] + b[0][1])],
        [0.5 * (a[1][0] + b[1][0]), 0.5 * (a[1][1] + b[1][1])],
    ]
}

/// Evaluates `Q(u)` on the curve's own grid: element-averaged transverse
/// stiffness, nodal trapezoid weights for the potential, and an element rule
/// for the skew pairing `det(u, u')`.
pub fn q_form(spec: &QFormSpec, curve: &SampledGraph) -> Result<f64> {
    check_span(curve, spec.l0)?;
    let s = curve.z_nodes();
    let u = curve.u_values();
    let n = u.len();
    let mut kinetic = 0.0;
    let mut skew = 0.0;
    for k in 0..n - 1 {
        let h = s[k + 1] - s[k];
        let gbar = avg_mat(spec.axis.g_perp(s[k]), spec.axis.g_perp(s[k + 1]));
        let du = [u[k + 1][0] - u[k][0], u[k + 1][1] - u[k][1]];
        kinetic += quad_at(&gbar, du, du) / (2.0 * h);
        let lam = 0.5 * (spec.field.skew(s[k]) + spec.field.skew(s[k + 1]));
        let det = u[k][0] * u[k + 1][1] - u[k][1] * u[k + 1][0];
        skew -= lam / (2.0 * spec.r0) * det;
    }
    let mut potential = 0.0;
    for k in 0..n {
        let w = trapezoid_weight(s, k);
        let p = spec.nodal_potential(s[k]);
        potential += w * quad_at(&p, u[k], u[k]);
    }
    Ok(2.0 * spec.r0 / spec.l0 * (kinetic + potential + skew))
}

/// Nodal gradient of [`q_form`] on the curve's grid.
pub fn q_form_gradient(spec: &QFormSpec, curve: &SampledGraph) -> Result<Vec<[f64; 2]>> {
    check_span(curve, spec.l0)?;
    let s = curve.z_nodes();
    let u = curve.u_values();
    let n = u.len();
    let mut grad = vec![[0.0; 2]; n];
    for k in 0..n - 1 {
        let h = s[k + 1] - s[k];
        let gbar = avg_mat(spec.axis.g_perp(s[k]), spec.axis.g_perp(s[k + 1]));
        let du = [u[k + 1][0] - u[k][0], u[k + 1][1] - u[k][1]];
        let gdu = [
            gbar[0][0] * du[0] + gbar[0][1] * du[1],
            gbar[1][0] * du[0] + gbar[1][1] * du[1],
        ];
        for i in 0..2 {
            grad[k][i] -= gdu[i] / h;
            grad[k + 1][i] += gdu[i] / h;
        }
        let c = 0.5 * (spec.field.skew(s[k]) + spec.field.skew(s[k + 1])) / (2.0 * spec.r0);
        // d det(a, b) / da = (b1, -b0), d det / db = (-a1, a0)
        grad[k][0] -= c * u[k + 1][1];
        grad[k][1] += c * u[k + 1][0];
        grad[k + 1][0] += c * u[k][1];
        grad[k + 1][1] -= c * u[k][0];
    }
    for k in 0..n {
        let w = trapezoid_weight(s, k);
        let p = spec.nodal_potential(s[k]);
        for i in 0..2 {
            grad[k][i] += 2.0 * w * (p[i][0] * u[k][0] + p[i][1] * u[k][1]);
        }
    }
    let scale = 2.0 * spec.r0 / spec.l0;
    for g in &mut grad {
        g[0] *= scale;
        g[1] *= scale;
    }
    Ok(grad)
}

/// Second variation of length alone (the `t^2` coefficient of the discrete
/// length of `t u`): transverse kinetic energy plus the curvature potential.
/// This is exactly the quadratic part of [`crate::geometry::curve_length`]'s
/// discretisation, so the remainder of the expansion is higher order in `t`
/// without any grid-consistency penalty.
pub fn length_expansion_quadratic(axis: &AxisJet, curve: &SampledGraph) -> Result<f64> {
    check_span(curve, axis.l0())?;
    let s = curve.z_nodes();
    let u = curve.u_values();
    let n = u.len();
    let mut total = 0.0;
    for k in 0..n - 1 {
        let h = s[k + 1] - s[k];
        let gbar = avg_mat(axis.g_perp(s[k]), axis.g_perp(s[k + 1]));
        let du = [u[k + 1][0] - u[k][0], u[k + 1][1] - u[k][1]];
        total += quad_at(&gbar, du, du) / (2.0 * h);
    }
    for k in 0..n {
        let w = trapezoid_weight(s, k);
        let d2 = axis.d2g33(s[k]);
        let d1 = axis.dg33(s[k]);
        let mut a = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                a[i][j] = 0.25 * d2[i][j] - 0.125 * d1[i] * d1[j];
            }
        }
        total += w * quad_at(&a, u[k], u[k]);
    }
    Ok(total)
}

pub(crate) fn trapezoid_weight(s: &[f64], k: usize) -> f64 {
    let n = s.len();
    if k == 0 {
        0.5 * (s[1] - s[0])
    } else if k == n - 1 {
        0.5 * (s[n - 1] - s[n - 2])
    } else {
        0.5 * (s[k + 1] - s[k - 1])
    }
}

/// Assembles the matrix of `Q` on a given grid, `2 (m+1)` degrees of freedom
/// ordered node-major. Agrees with [`q_form`] to rounding.
pub(crate) fn q_matrix(spec: &QFormSpec, grid: &[f64]) -> DMatrix<f64> {
    let n = grid.len();
    let mut q = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n - 1 {
        let h = grid[k + 1] - grid[k];
        let gbar = avg_mat(spec.axis.g_perp(grid[k]), spec.axis.g_perp(grid[k + 1]));
        for a in 0..2 {
            for b in 0..2 {
                let v = gbar[a][b] / (2.0 * h);
                q[(2 * k + a, 2 * k + b)] += v;
                q[(2 * (k + 1) + a, 2 * (k + 1) + b)] += v;
                q[(2 * k + a, 2 * (k + 1) + b)] -= v;
                q[(2 * (k + 1) + a, 2 * k + b)] -= v;
            }
        }
        let lam = 0.5 * (spec.field.skew(grid[k]) + spec.field.skew(grid[k + 1]));
        let c = -lam / (2.0 * spec.r0);
        // det(u_k, u_{k+1}) = u_k^T J u_{k+1}, J = [[0,1],[-1,0]]
        let j = [[0.0, 1.0], [-1.0, 0.0]];
        for a in 0..2 {
            for b in 0..2 {
                q[(2 * k + a, 2 * (k + 1) + b)] += 0.5 * c * j[a][b];
                q[(2 * (k + 1) + b, 2 * k + a)] += 0.5 * c * j[a][b];
            }
        }
    }
    for k in 0..n {
        let w = trapezoid_weight(grid, k);
        let p = spec.nodal_potential(grid[k]);
        for a in 0..2 {
            for b in 0..2 {
                q[(2 * k + a, 2 * k + b)] += w * p[a][b];
            }
        }
    }
    q * (2.0 * spec.r0 / spec.l0)
}

/// The reference inner product used to normalise the spectrum of `Q`: half
/// the `H^1`-type energy of `u` weighted by the transverse metric, with the
/// same element and nodal rules as `Q` itself.
pub(crate) fn gram_matrix(spec: &QFormSpec, grid: &[f64]) -> DMatrix<f64> {
    let n = grid.len();
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n - 1 {
        let h = grid[k + 1] - grid[k];
        let gbar = avg_mat(spec.axis.g_perp(grid[k]), spec.axis.g_perp(grid[k + 1]));
        for a in 0..2 {
            for b in 0..2 {
                let v = gbar[a][b] / (2.0 * h);
                g[(2 * k + a, 2 * k + b)] += v;
                g[(2 * (k + 1) + a, 2 * (k + 1) + b)] += v;
                g[(2 * k + a, 2 * (k + 1) + b)] -= v;
                g[(2 * (k + 1) + a, 2 * k + b)] -= v;
            }
        }
    }
    for k in 0..n {
        let w = trapezoid_weight(grid, k);
        let gp = spec.axis.g_perp(grid[k]);
        for a in 0..2 {
            for b in 0..2 {
                g[(2 * k + a, 2 * k + b)] += 0.5 * w * gp[a][b];
            }
        }
    }
    g
}

/// Spectrum of `Q` relative to the weighted `H^1` norm.
#[derive(Clone, Debug)]
pub struct QSpectrum {
    /// Coercivity constant: the smallest generalised eigenvalue. Positive
    /// exactly when the axis is a nondegenerate maximum of the ratio.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Continuity constant of the form, equal to `lambda_max`.
    pub alpha_q: f64,
    /// Full generalised spectrum at the base resolution, ascending.
    pub eigenvalues: Vec<f64>,
    /// Extreme eigenvalues recomputed with twice the elements, as a
    /// discretisation sanity check.
    pub lambda_min_refined: f64,
    pub lambda_max_refined: f64,
}

fn spectrum_at(spec: &QFormSpec, m: usize) -> Result<Vec<f64>> {
    let grid = uniform_grid(0.0, spec.l0, m);
    let q = q_matrix(spec, &grid);
    let g = gram_matrix(spec, &grid);
    let chol = nalgebra::linalg::Cholesky::new(g).ok_or_else(|| {
        Error::Domain("the reference norm for the spectrum is not positive definite".into())
    })?;
    let l = chol.l();
    let t1 = l
        .solve_lower_triangular(&q)
        .ok_or_else(|| Error::Domain("triangular solve failed during whitening".into()))?;
    let s = l
        .solve_lower_triangular(&t1.transpose())
        .ok_or_else(|| Error::Domain("triangular solve failed during whitening".into()))?;
    let s = (&s + s.transpose()) * 0.5;
    let eig = nalgebra::linalg::SymmetricEigen::new(s);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Generalised eigenvalues of `Q` against the weighted `H^1` Gram matrix on
/// a uniform grid with `m` elements, plus the extreme eigenvalues at `2 m`
/// elements for a refinement check.
pub fn q_spectrum(spec: &QFormSpec, m: usize) -> Result<QSpectrum> {
    if m < 4 {
        return Err(Error::Argument(format!("need at least 4 elements, got {m}")));
    }
    let vals = spectrum_at(spec, m)?;
    let refined = spectrum_at(spec, 2 * m)?;
    Ok(QSpectrum {
        lambda_min: vals[0],
        lambda_max: *vals.last().unwrap(),
        alpha_q: *vals.last().unwrap(),
        lambda_min_refined: refined[0],
        lambda_max_refined: *refined.last().unwrap(),
        eigenvalues: vals,
    })
}

/// Sup norm of the first-variation covector of the ratio along the axis,
/// `lin(s) - (r0/2) dg33(s)`, sampled uniformly. Zero exactly when the axis
/// is a critical point of the ratio, as it is for the ball.
pub fn criticality_residual(spec: &QFormSpec, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {samples}")));
    }
    let mut worst = 0.0_f64;
    for i in 0..samples {
        let s = spec.l0 * i as f64 / (samples - 1) as f64;
        let lin = spec.field.linear(s);
        let dg = spec.axis.dg33(s);
        let c = [
            lin[0] - 0.5 * spec.r0 * dg[0],
            lin[1] - 0.5 * spec.r0 * dg[1],
        ];
        worst = worst.max(c[0].hypot(c[1]));
    }
    Ok(worst)
}

/// Small-ball closed form for the second derivative of the ratio along a
/// variation given in meridian polar form `(x(z), theta(z))`:
///
/// ```text
/// d2R = -(rho^2 / 12) int_{-1}^{1} [ (1+z^2)^2 (x'^2 + x^2 theta'^2)
///                                    + x^2 (1+z^2)(1+3z^2) ] dz,
/// ```
///
/// accurate to a relative `O(rho^2)` against the exact second variation.
/// `x` and `theta` are interpolated linearly between the given `z` nodes and
/// each element is integrated by a Gauss rule that is exact for the
/// resulting polynomial integrand.
pub fn ball_hessian_closed_form(
    rho: f64,
    z_grid: &[f64],
    x: &[f64],
    theta: &[f64],
) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("ball radius must be positive, got {rho}")));
    }
    let n = z_grid.len();
    if n < 2 || x.len() != n || theta.len() != n {
        return Err(Error::Argument(format!(
            "grid and variation sizes disagree: {} z nodes, {} x values, {} theta values",
            n,
            x.len(),
            theta.len()
        )));
    }
    if (z_grid[0] + 1.0).abs() > 1e-9 || (z_grid[n - 1] - 1.0).abs() > 1e-9 {
        return Err(Error::Argument(
            "the variation grid must span the full meridian interval [-1, 1]".into(),
        ));
    }
    for w in z_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Argument("z grid must be strictly increasing".into()));
        }
    }
    let (gt, gw) = gauss_legendre(5);
    let mut total = 0.0;
    for k in 0..n - 1 {
        let h = z_grid[k + 1] - z_grid[k];
        let xp = (x[k + 1] - x[k]) / h;
        let tp = (theta[k + 1] - theta[k]) / h;
        for (t, w) in gt.iter().zip(&gw) {
            let z = 0.5 * (z_grid[k] + z_grid[k + 1]) + 0.5 * h * t;
            let lam = (z - z_grid[k]) / h;
            let xv = x[k] + lam * (x[k + 1] - x[k]);
            let a = 1.0 + z * z;
            let integrand = a * a * (xp * xp + xv * xv * tp * tp)
                + xv * xv * a * (1.0 + 3.0 * z * z);
            total += 0.5 * h * w * integrand;
        }
    }
    Ok(-(rho * rho / 12.0) * total)
}

// ---------------------------------------------------------------------------
// the ratio itself (ball geometry)

/// The flux-to-length ratio machinery of the ball: the Meissner flux through
/// the axis meridian (`flux0`), the axis ratio `r0 = flux0 / l0`, and the
/// flux and length of displaced graph curves.
#[derive(Clone)]
pub struct RatioContext {
    chart: BallChart,
    flux0: f64,
    r0: f64,
}

impl RatioContext {
    pub fn ball(rho: f64) -> Result<Self> {
        let chart = BallChart::new(rho)?;
        let flux0 = flux_gamma0_ball(rho)?;
        let r0 = flux0 / chart.l0();
        Ok(RatioContext { chart, flux0, r0 })
    }

    pub fn chart(&self) -> &BallChart {
        &self.chart
    }

    pub fn flux0(&self) -> f64 {
        self.flux0
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn l0(&self) -> f64 {
        self.chart.l0()
    }

    /// Total flux through the meridian surface swept by the curve.
    pub fn flux(&self, curve: &SampledGraph) -> Result<f64> {
        Ok(self.flux0 + flux_difference(curve, &self.chart)?)
    }

    /// Flux divided by curve length. Maximised by the axis itself.
    pub fn ratio(&self, curve: &SampledGraph) -> Result<f64> {
        Ok(self.flux(curve)? / curve_length(curve, &self.chart)?)
    }

    /// Nodal gradient of the ratio.
    pub fn ratio_gradient(&self, curve: &SampledGraph) -> Result<Vec<[f64; 2]>> {
        let flux = self.flux(curve)?;
        let length = curve_length(curve, &self.chart)?;
        let dflux = flux_difference_gradient(curve, &self.chart)?;
        let dlen = curve_length_gradient(curve, &self.chart)?;
        Ok(dflux
            .iter()
            .zip(&dlen)
            .map(|(df, dl)| {
                [
                    (df[0] * length - flux * dl[0]) / (length * length),
                    (df[1] * length - flux * dl[1]) / (length * length),
                ]
            })
            .collect())
    }

    /// The defect functional at tension `ell`:
    ///
    /// ```text
    /// Q_ell(u) = ell^2 (|Gamma|_ell - <Gamma>) + (<Gamma> - l0) - dflux / r0,
    /// ```
    ///
    /// with `|Gamma|_ell` the length under the `ell`-rescaled transverse
    /// metric and `<Gamma>` the projected length. At `ell = 1` this reduces
    /// algebraically to `|Gamma| (r0 - ratio) / r0`.
    ///
    /// Valid only while the curve stays in the half-size tube where the
    /// localisation cutoff is identically one.
    pub fn q_ell(&self, curve: &SampledGraph, ell: f64) -> Result<f64> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::Argument(format!("tension must be positive, got {ell}")));
        }
        let half = 0.5 * self.chart.delta();
        let max_u = curve.max_displacement();
        if max_u > half {
            return Err(Error::Domain(format!(
                "displacement |u| = {max_u:.6} leaves the half-size tube of radius {half} \
                 where the localisation cutoff is one"
            )));
        }
        let l_ell = curve_length_scaled(curve, &self.chart, ell)?;
        let proj = projected_length(curve, &self.chart)?;
        let dflux = flux_difference(curve, &self.chart)?;
        let l0 = self.l0();
        Ok(ell * ell * (l_ell - proj) + (proj - l0) - dflux / self.r0)
    }
}

/// Options for [`maximize_ratio`].
#[derive(Clone, Copy, Debug)]
pub struct MaximizeOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions {
            // the ratio is O(rho^2), so descent on the negated ratio keeps
            // making representable progress down to ~1e-10 gradient norms
            grad_tol: 1e-9,
            max_iter: 2000,
        }
    }
}

/// Result of [`maximize_ratio`].
pub struct MaximizeOutcome {
    pub curve: SampledGraph,
    pub ratio: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Ratio value after each accepted step, nondecreasing.
    pub ratio_trace: Vec<f64>,
    /// Sup-norm gradient alongside each entry of `ratio_trace`.
    pub grad_trace: Vec<f64>,
    /// How many line-search trial points had to be clamped back into the
    /// chart; nonzero means the start was near the tube boundary.
    pub boundary_projections: usize,
}

/// Maximises the flux-to-length ratio over nodal displacements of the
/// starting curve (all nodes free, endpoints included), by a quasi-Newton
/// descent on the negated ratio. Trial points are clamped into the chart.
/// Starting close to the axis this converges back onto it, which is the
/// nondegenerate-maximum property made computable.
pub fn maximize_ratio(
    ctx: &RatioContext,
    start: &SampledGraph,
    opts: &MaximizeOptions,
) -> Result<MaximizeOutcome> {
    let grid = start.z_nodes().to_vec();
    let n = start.len();
    let rmax = 0.8 * ctx.chart().delta();
    let mut x0 = Vec::with_capacity(2 * n);
    for u in start.u_values() {
        x0.push(u[0]);
        x0.push(u[1]);
    }
    let curve_of = |x: &[f64]| -> Result<SampledGraph> {
        let u: Vec<[f64; 2]> = x.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        SampledGraph::new(grid.clone(), u)
    };
    let mut eval = |x: &[f64], g: &mut [f64]| -> Result<f64> {
        let curve = curve_of(x)?;
        let value = ctx.ratio(&curve)?;
        let grad = ctx.ratio_gradient(&curve)?;
        for (k, gk) in grad.iter().enumerate() {
            g[2 * k] = -gk[0];
            g[2 * k + 1] = -gk[1];
        }
        Ok(-value)
    };
    let project = |x: &mut [f64]| -> usize {
        let mut touched = 0;
        for c in x.chunks_exact_mut(2) {
            let r = c[0].hypot(c[1]);
            if r > rmax {
                let f = rmax / r;
                c[0] *= f;
                c[1] *= f;
                touched += 1;
            }
        }
        touched
    };
    let outcome = opt::lbfgs(
        x0,
        opt::Problem {
            eval: &mut eval,
            project: Some(&project),
            accept: None,
            observe: None,
        },
        &opt::Options {
            grad_tol: opts.grad_tol,
            max_iter: opts.max_iter,
            ..opt::Options::default()
        },
    )?;
    let curve = curve_of(&outcome.x)?;
    Ok(MaximizeOutcome {
        curve,
        ratio: -outcome.value,
        grad_norm: outcome.grad_norm,
        iterations: outcome.iterations,
        converged: outcome.stop == opt::Stop::GradTol,
        ratio_trace: outcome.trace.iter().map(|t| -t.value).collect(),
        grad_trace: outcome.trace.iter().map(|t| t.grad_norm).collect(),
        boundary_projections: outcome.projections,
    })
}
