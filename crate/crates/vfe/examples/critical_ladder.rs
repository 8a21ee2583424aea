//! The ladder of critical fields: for each filament count N there is a field
//! H_N past which N vortex lines beat N-1, separated from its neighbors by
//! increments of order ln|ln eps|. This walks the ladder at several coherence
//! lengths, confirms the one-step Newton break-even search against the closed
//! form, and prints the optimal-count staircase.

use vfe::critfield::{
    break_even, critical_field_table, energy_expansion, h_n, optimal_n, ModelConstants,
};
use vfe::renorm::isotropic_polygon_minimum;

fn main() -> Result<(), vfe::Error> {
    // interaction minima from the synthetic isotropic problem, where the
    // polygon closed form is available for every count
    let min_w: Vec<f64> = (0..=8).map(isotropic_polygon_minimum).collect();
    let consts = ModelConstants::new(0.5, 1.0, 1.1967, 0.8, 0.0, min_w)?;

    for eps in [1e-2, 1e-3, 1e-5] {
        let h1 = h_n(1, eps, &consts)?;
        let table = critical_field_table(eps, h1, &consts, 6)?;
        println!("eps = {eps:.0e}   (energies quoted at h = H_1 = {h1:.6})");
        println!("  N   k_N           H_N            break-even     g_eps(N, H_1)");
        for row in &table.rows {
            let be = break_even(row.n, eps, &consts)?;
            println!(
                "  {}   {:>10.6}   {:>12.8}   {:>12.8}   {:>12.6}",
                row.n, row.k_n, row.h_n, be, row.g_eps
            );
        }
        println!("  ladder strictly increasing: {}\n", table.monotone);
    }

    // at the break-even field the two competing counts tie exactly
    let eps = 1e-3;
    let h3 = h_n(3, eps, &consts)?;
    let g2 = energy_expansion(2, h3, eps, &consts)?;
    let g3 = energy_expansion(3, h3, eps, &consts)?;
    println!("tie at H_3 (eps = 1e-3): g(2) = {:.10}, g(3) = {:.10}", g2.total, g3.total);
    println!(
        "  three-filament terms: applied {:+.4}, repulsion {:+.4}, counting {:+.4}, \
         interaction {:+.4}, core {:+.4}, domain {:+.4}",
        g3.applied, g3.repulsion_log, g3.counting_log, g3.interaction, g3.core, g3.domain_constant
    );

    // the staircase: optimal count against the applied field, each step
    // sitting at the matching rung of the ladder
    println!("\noptimal filament count across the ladder (eps = 1e-3):");
    let lo = 0.9 * h_n(1, eps, &consts)?;
    let hi = 1.02 * h_n(6, eps, &consts)?;
    let mut prev = usize::MAX;
    for i in 0..=400 {
        let h = lo + (hi - lo) * i as f64 / 400.0;
        let n = optimal_n(h, eps, &consts, 6)?;
        if n != prev {
            if n >= 1 {
                println!(
                    "  h = {h:9.5}   optimal N jumps to {n}   (H_{n} = {:9.5})",
                    h_n(n, eps, &consts)?
                );
            } else {
                println!("  h = {h:9.5}   optimal N jumps to {n}");
            }
            prev = n;
        }
    }
    Ok(())
}
