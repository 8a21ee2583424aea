//! Critical-field arithmetic for families of vortex lines.
//!
//! At small coherence length `eps` a configuration of `N` near-axial vortex
//! lines in an applied field `h` carries the reduced energy
//!
//! ```text
//! g(N, h) = h^2 J0 - 2 pi R0 L0 N (h - lam)
//!           + (pi/2) L0 N (N - 1) (ln lam - ln N)
//!           + N^2 C_Omega + min W_N + gamma L0 N
//! ```
//!
//! where `lam = |ln eps| / (2 R0)` is the field scale of the first vortex.
//! All logarithms of the field are frozen at this scale, which makes
//! `g(N, h) - g(N - 1, h)` exactly linear in `h`; the N-th critical field is
//! the break-even point of that difference and has the closed form
//! `H_N = (|ln eps| + (N - 1) ln lam + k_N) / (2 R0)`.
//!
//! The Meissner coefficient `J0` multiplies the same `h^2` for every `N`, so
//! it cancels from all comparisons between vortex numbers; it defaults to
//! zero and every output is then the excess energy over the vortex-free
//! state.

use std::f64::consts::PI;

use crate::{Error, Result};

/// The scalar constants of the reduced energy model.
#[derive(Clone, Debug)]
pub struct ModelConstants {
    /// Maximal flux-to-length ratio of the domain (reached on the axis).
    pub r0: f64,
    /// Length of the maximizing axis.
    pub l0: f64,
    /// Core energy per unit length of a single vortex line.
    pub gamma: f64,
    /// Domain-shape constant of the far-field energy, entering with weight
    /// `N^2` in the energy and `2N - 1` in successive differences.
    pub c_omega: f64,
    /// Quadratic Meissner response coefficient; zero means outputs are
    /// excess energies over `h^2 J0`.
    pub j0: f64,
    min_w: Vec<f64>,
}

impl ModelConstants {
    /// `min_w[n]` is the minimal interaction energy of `n` filaments; the
    /// empty configuration must be tabulated as exactly zero.
    pub fn new(
        r0: f64,
        l0: f64,
        gamma: f64,
        c_omega: f64,
        j0: f64,
        min_w: Vec<f64>,
    ) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) || !(l0 > 0.0 && l0.is_finite()) {
            return Err(Error::Argument(format!(
                "the ratio maximum and axis length must be positive, got r0={r0}, l0={l0}"
            )));
        }
        for (name, v) in [("gamma", gamma), ("c_omega", c_omega), ("j0", j0)] {
            if !v.is_finite() {
                return Err(Error::Argument(format!("{name} must be finite, got {v}")));
            }
        }
        if min_w.is_empty() {
            return Err(Error::Argument(
                "the interaction minima table must at least hold the empty configuration".into(),
            ));
        }
        if min_w[0] != 0.0 {
            return Err(Error::Argument(format!(
                "min_w[0] is the energy of no filaments and must be exactly 0, got {}",
                min_w[0]
            )));
        }
        if let Some(bad) = min_w.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "interaction minima must be finite, found {bad}"
            )));
        }
        Ok(ModelConstants {
            r0,
            l0,
            gamma,
            c_omega,
            j0,
            min_w,
        })
    }

    /// Tabulated minimal interaction energy of `n` filaments.
    pub fn min_w(&self, n: usize) -> Result<f64> {
        self.min_w.get(n).copied().ok_or_else(|| {
            Error::Argument(format!(
                "no interaction minimum tabulated for {n} filaments (table covers 0..={})",
                self.min_w.len() - 1
            ))
        })
    }

    pub fn min_w_table(&self) -> &[f64] {
        &self.min_w
    }
}

fn log_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "eps must lie strictly between 0 and 1 so that |ln eps| is positive, got {eps}"
        )));
    }
    Ok(-eps.ln())
}

/// The eps-independent part of the N-th critical field:
///
/// ```text
/// k_N = (N-1) ln(1/N) + (N-1)(N-2)/2 ln((N-1)/N)
///       + (min W_N - min W_{N-1} + gamma L0 + (2N - 1) C_Omega) / (pi L0)
/// ```
///
/// with the indeterminate product at `N = 1` read as zero.
pub fn k_n(n: usize, consts: &ModelConstants) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument(
            "the critical-field constant is defined for at least one filament".into(),
        ));
    }
    let wn = consts.min_w(n)?;
    let wm = consts.min_w(n - 1)?;
    let nf = n as f64;
    let combinatorial = if n == 1 {
        0.0
    } else {
        (nf - 1.0) * (1.0 / nf).ln() + 0.5 * (nf - 1.0) * (nf - 2.0) * ((nf - 1.0) / nf).ln()
    };
    Ok(combinatorial
        + (wn - wm + consts.gamma * consts.l0 + (2.0 * nf - 1.0) * consts.c_omega)
            / (PI * consts.l0))
}

/// The N-th critical field `(|ln eps| + (N-1) ln lam + k_N) / (2 R0)`.
pub fn h_n(n: usize, eps: f64, consts: &ModelConstants) -> Result<f64> {
    let l = log_eps(eps)?;
    let lam = l / (2.0 * consts.r0);
    let k = k_n(n, consts)?;
    Ok((l + (n as f64 - 1.0) * lam.ln() + k) / (2.0 * consts.r0))
}

/// Term-by-term reduced energy of `n` filaments at applied field `h_ex`.
#[derive(Clone, Copy, Debug)]
pub struct EnergyBreakdown {
    pub n: usize,
    pub h_ex: f64,
    /// Quadratic Meissner response `h_ex^2 J0`.
    pub meissner: f64,
    /// Net gain from the applied field against line tension,
    /// `-2 pi R0 L0 N (h_ex - lam)`; equals `-2 pi K R0 L0 N ln|ln eps|`
    /// with the slope `K` below.
    pub applied: f64,
    /// Mutual repulsion at the vortex scale, `(pi/2) L0 N (N-1) ln lam`.
    pub repulsion_log: f64,
    /// Combinatorial correction `-(pi/2) L0 N (N-1) ln N`.
    pub counting_log: f64,
    /// Tabulated interaction minimum `min W_N`.
    pub interaction: f64,
    /// Core energy `gamma L0 N`.
    pub core: f64,
    /// Domain constant `N^2 C_Omega`.
    pub domain_constant: f64,
    /// Field slope `K = (h_ex - lam) / ln|ln eps|` relating the applied
    /// field to the first critical scale.
    pub k_slope: f64,
    /// Sum of the seven energy terms.
    pub total: f64,
}

/// Expands the reduced energy of `n` filaments into its terms.
pub fn energy_expansion(
    n: usize,
    h_ex: f64,
    eps: f64,
    consts: &ModelConstants,
) -> Result<EnergyBreakdown> {
    let l = log_eps(eps)?;
    if !h_ex.is_finite() {
        return Err(Error::Argument(format!(
            "the applied field must be finite, got {h_ex}"
        )));
    }
    let lam = l / (2.0 * consts.r0);
    let nf = n as f64;
    let meissner = h_ex * h_ex * consts.j0;
    let applied = -2.0 * PI * consts.r0 * consts.l0 * nf * (h_ex - lam);
    let pair = 0.5 * PI * consts.l0 * nf * (nf - 1.0);
    let repulsion_log = pair * lam.ln();
    let counting_log = if n <= 1 { 0.0 } else { -pair * nf.ln() };
    let interaction = consts.min_w(n)?;
    let core = consts.gamma * consts.l0 * nf;
    let domain_constant = nf * nf * consts.c_omega;
    let total =
        meissner + applied + repulsion_log + counting_log + interaction + core + domain_constant;
    Ok(EnergyBreakdown {
        n,
        h_ex,
        meissner,
        applied,
        repulsion_log,
        counting_log,
        interaction,
        core,
        domain_constant,
        k_slope: (h_ex - lam) / l.ln(),
        total,
    })
}

/// Reduced energy of `n` filaments at applied field `h_ex`.
pub fn g_eps(n: usize, h_ex: f64, eps: f64, consts: &ModelConstants) -> Result<f64> {
    Ok(energy_expansion(n, h_ex, eps, consts)?.total)
}

/// Applied field at which `n` filaments tie with `n - 1`, found by Newton
/// iteration on the energy difference. The difference is linear in the field
/// (the Meissner term cancels), so the iteration lands in one step and the
/// result agrees with [`h_n`] to round-off.
pub fn break_even(n: usize, eps: f64, consts: &ModelConstants) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument(
            "the break-even field compares at least one filament with one fewer".into(),
        ));
    }
    let l = log_eps(eps)?;
    let mut h = l / (2.0 * consts.r0);
    let slope = -2.0 * PI * consts.r0 * consts.l0;
    for _ in 0..64 {
        let diff = g_eps(n, h, eps, consts)? - g_eps(n - 1, h, eps, consts)?;
        let step = diff / slope;
        h -= step;
        if step.abs() <= 1e-14 * (1.0 + h.abs()) {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence(format!(
        "break-even search for {n} filaments did not settle"
    )))
}

/// Number of filaments minimizing the reduced energy at the given field,
/// searched over `0..=n_max` with ties resolved toward fewer filaments.
pub fn optimal_n(h_ex: f64, eps: f64, consts: &ModelConstants, n_max: usize) -> Result<usize> {
    if n_max < 1 {
        return Err(Error::Argument(
            "the optimal-count search needs n_max >= 1".into(),
        ));
    }
    let mut best = 0usize;
    let mut best_g = g_eps(0, h_ex, eps, consts)?;
    for n in 1..=n_max {
        let g = g_eps(n, h_ex, eps, consts)?;
        if g < best_g {
            best = n;
            best_g = g;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug)]
pub struct CriticalFieldRow {
    pub n: usize,
    pub k_n: f64,
    pub h_n: f64,
    /// Reduced energy of `n` filaments at the table's reference field.
    pub g_eps: f64,
}

/// Critical fields for `n = 1..=n_max` at fixed `eps`.
#[derive(Clone, Debug)]
pub struct CriticalFieldTable {
    pub eps: f64,
    /// Reference applied field used for the energy column.
    pub h_ex: f64,
    pub rows: Vec<CriticalFieldRow>,
    /// Whether the critical fields were strictly increasing down the table.
    pub monotone: bool,
}

pub fn critical_field_table(
    eps: f64,
    h_ex: f64,
    consts: &ModelConstants,
    n_max: usize,
) -> Result<CriticalFieldTable> {
    if n_max == 0 {
        return Err(Error::Argument("the table needs n_max >= 1".into()));
    }
    let mut rows = Vec::with_capacity(n_max);
    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    for n in 1..=n_max {
        let row = CriticalFieldRow {
            n,
            k_n: k_n(n, consts)?,
            h_n: h_n(n, eps, consts)?,
            g_eps: g_eps(n, h_ex, eps, consts)?,
        };
        if row.h_n <= prev {
            monotone = false;
        }
        prev = row.h_n;
        rows.push(row);
    }
    Ok(CriticalFieldTable {
        eps,
        h_ex,
        rows,
        monotone,
    })
}
