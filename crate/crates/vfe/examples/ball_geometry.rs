//! Tour of the small-ball reference geometry: the tube chart around the
//! vertical axis, the induced metric jets, the Meissner flux through the
//! meridian, and the flux-to-length ratio that the axis maximizes.

use vfe::fields::{ball_meissner_curl, flux_gamma0_ball};
use vfe::geometry::{AxisJet, SampledGraph};
use vfe::isoflux::RatioContext;

fn main() -> Result<(), vfe::Error> {
    let rho = 0.1;
    let ctx = RatioContext::ball(rho)?;
    let axis = AxisJet::ball(rho)?;

    println!("ball radius           {rho}");
    println!("axis length           {}", ctx.l0());
    println!("meridian flux         {:.12e}", ctx.flux0());
    println!("axis ratio r0         {:.12e}", ctx.r0());
    println!(
        "flux leading term     {:.12e}  (rho^3/3, remainder is fifth order)",
        rho * rho * rho / 3.0
    );

    // the leading remainder coefficient across a radius sweep
    for r in [0.1, 0.05, 0.01] {
        let flux = flux_gamma0_ball(r)?;
        let k = (flux - r * r * r / 3.0).abs() / (0.5 * r.powi(5));
        println!("  rho = {r:<5}  flux = {flux:.10e}  remainder/0.5rho^5 = {k:.4}");
    }

    // transverse metric along the axis: identity at the equator plane,
    // opening up toward the poles
    println!("\n  s        g_perp(1,1)      dg33");
    for k in 0..=4 {
        let s = ctx.l0() * k as f64 / 4.0;
        let g = axis.g_perp(s);
        let dg = axis.dg33(s);
        println!("  {s:<7.3}  {:<15.10}  [{:+.3e}, {:+.3e}]", g[0][0], dg[0], dg[1]);
    }

    // the Meissner supercurrent curls around the axis; sample its magnitude
    println!("\n  r/rho    |curl| at the equator");
    for f in [0.25, 0.5, 0.75] {
        let c = ball_meissner_curl(rho, f * rho, std::f64::consts::FRAC_PI_2)?;
        println!("  {f:<7.2}  {c:.10e}");
    }

    // a bulged curve is longer but gains little flux: the ratio drops
    let bulge = SampledGraph::uniform(ctx.l0(), 32, |s| {
        [0.3 * rho * (std::f64::consts::PI * s / ctx.l0()).sin(), 0.0]
    });
    println!("\nbulged-curve ratio    {:.12e}", ctx.ratio(&bulge)?);
    println!("axis stays optimal    {}", ctx.ratio(&bulge)? < ctx.r0());
    Ok(())
}
