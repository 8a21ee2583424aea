//! The radial profile of a single vortex core and the constants built from
//! it: solve f'' + f'/r - f/r^2 + (1 - f^2) f = 0 with f(0) = 0, f(inf) = 1,
//! watch the core-energy estimate settle as the integration radius grows,
//! and check the disk-vortex energy against its logarithmic expansion.

use vfe::profile::{disk_vortex_energy, gamma_from_profile, solve_f0};

fn main() -> Result<(), vfe::Error> {
    let profile = solve_f0(100.0, 8001)?;
    println!(
        "profile solved on [0, {}] with {} nodes, equation residual {:.3e}",
        profile.r_max(),
        profile.f_values().len(),
        profile.residual()
    );

    // near the origin f ~ a r, far out 1 - f ~ 1/(2 r^2)
    println!("\n  r        f(r)              1 - f(r)");
    for r in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        let idx = (r / profile.r_max() * (profile.f_values().len() - 1) as f64).round() as usize;
        let f = profile.f_values()[idx];
        println!("  {r:<6}   {f:.12}    {:.6e}", 1.0 - f);
    }
    let h = profile.r_max() / (profile.f_values().len() - 1) as f64;
    println!("  slope at the origin: {:.10}", profile.f_values()[1] / h);

    // the energy minus its logarithm settles to the core constant
    println!("\n  R      gamma_est(R)");
    for r in [10.0, 25.0, 50.0, 75.0, 100.0] {
        println!("  {r:<4}   {:.12}", gamma_from_profile(&profile, r)?);
    }
    let gamma = gamma_from_profile(&profile, 100.0)?;
    let drift = (gamma - gamma_from_profile(&profile, 50.0)?).abs();
    println!("  tail drift |gamma(100) - gamma(50)| = {drift:.3e}");

    // disk energy against 2 (pi ln(r_eps/eps) + gamma)
    println!("\n  r_eps/eps   disk energy          2(pi ln + gamma)     gap");
    for ratio in [20.0, 50.0, 100.0] {
        let e = disk_vortex_energy(1.0, ratio, &profile)?;
        let expansion = 2.0 * (std::f64::consts::PI * ratio.ln() + gamma);
        println!("  {ratio:<9}   {e:<18.12}   {expansion:<18.12}   {:+.3e}", e - expansion);
    }

    // the energy depends on eps and r_eps only through the ratio
    let a = disk_vortex_energy(1e-3, 0.1, &profile)?;
    let b = disk_vortex_energy(1e-2, 1.0, &profile)?;
    println!("\nscale invariance: E(1e-3, 0.1) - E(1e-2, 1.0) = {:.3e}", a - b);
    Ok(())
}
