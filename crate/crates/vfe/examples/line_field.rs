//! The magnetic field of closed current lines: Biot-Savart evaluation against
//! closed forms, circulation around a linking loop, the near-field
//! approximation, and the domain constant from the regularized field energy
//! of an axis-plus-return circuit in a ball.

use std::f64::consts::PI;

use vfe::fields::{
    axis_return_curve, biot_savart_circulation, biot_savart_eval, biot_savart_nearfield,
    c_omega_estimate, COmegaOptions, ClosedCurve3D,
};
use vfe::geometry::BallGeometry;

fn main() -> Result<(), vfe::Error> {
    // center field of a unit circle is pi * normal; a regular n-gon gives
    // exactly n tan(pi/n) times the normal, converging quadratically
    println!("center field of regular n-gons of unit radius (limit pi):");
    println!("  n       B_z(center)        n tan(pi/n)        gap to pi");
    for n in [6usize, 24, 96, 384, 1536] {
        let gon = ClosedCurve3D::regular_polygon([0.0; 3], [0.0, 0.0, 1.0], 1.0, n)?;
        let b = biot_savart_eval(&gon, [0.0; 3])?;
        let closed = n as f64 * (PI / n as f64).tan();
        println!("  {n:<6}  {:.12}    {closed:.12}    {:+.3e}", b[2], b[2] - PI);
    }

    // off-axis field of the circle: on the symmetry axis the closed form is
    // pi / (1 + z^2)^{3/2}
    let circle = ClosedCurve3D::regular_polygon([0.0; 3], [0.0, 0.0, 1.0], 1.0, 4096)?;
    println!("\non-axis field of the unit circle (closed form pi (1 + z^2)^(-3/2)):");
    for z in [0.0, 0.5, 1.0, 2.0] {
        let b = biot_savart_eval(&circle, [0.0, 0.0, z])?;
        let closed = PI / (1.0 + z * z).powf(1.5);
        println!("  z = {z}   B_z = {:.10}   closed {closed:.10}", b[2]);
    }

    // circulation of the field along a loop linking the wire once is 2 pi
    let small = |t: f64| [1.0 + 0.3 * t.cos(), 0.0, 0.3 * t.sin()];
    let linking = ClosedCurve3D::new(
        (0..2048).map(|k| small(2.0 * PI * k as f64 / 2048.0)).collect(),
    )?;
    let circ = biot_savart_circulation(&circle, &linking)?;
    println!(
        "\ncirculation around a loop linking the wire once: |{circ:.10}| vs 2 pi = {:.10}",
        2.0 * PI
    );

    // very close to the wire the field is 1/dist along offset x tangent;
    // probe at an angle between polygon vertices so the nearest point is
    // unambiguous
    println!("\nnear-field check at distance d from the wire:");
    let th = 0.3_f64;
    for d in [0.05, 0.01, 0.002] {
        let p = [(1.0 + d) * th.cos(), (1.0 + d) * th.sin(), 0.0];
        let full = biot_savart_eval(&circle, p)?;
        let near = biot_savart_nearfield(&circle, p)?;
        let gap = ((full[0] - near[0]).powi(2)
            + (full[1] - near[1]).powi(2)
            + (full[2] - near[2]).powi(2))
        .sqrt();
        let mag = (near[0] * near[0] + near[1] * near[1] + near[2] * near[2]).sqrt();
        // the absolute gap carries the curvature logarithm, so only the
        // relative gap vanishes as the wire is approached
        println!(
            "  d = {d:<6}  |near| = {mag:10.4}  (1/d = {:7.1})   relative gap = {:.3e}",
            1.0 / d,
            gap / mag
        );
    }

    // domain constant of the unit ball: energy of the axis-plus-return
    // circuit minus the diverging log of the core cutoff
    let ball = BallGeometry::new(1.0)?;
    let circuit = axis_return_curve(&ball, 0.05, 96)?;
    let opts = COmegaOptions::default();
    let report = c_omega_estimate(
        &ball,
        &circuit,
        &[0.05, 0.035, 0.025, 0.018, 0.012],
        &opts,
    )?;
    println!("\ndomain constant of the unit ball from the regularized field energy:");
    println!("  rho_cut   excised energy    + log counterterm");
    for row in &report.rows {
        println!("  {:<7}   {:<14.8}    {:.8}", row.rho_cut, row.energy, row.sum);
    }
    println!("  zero-cutoff extrapolation: {:.8}   (converged: {})",
        report.extrapolated, report.converged);
    Ok(())
}
