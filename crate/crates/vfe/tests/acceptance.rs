//! End-to-end checks of the library's numerical guarantees. Every test
//! verifies one headline property at its stated tolerance and asserts its
//! runtime budget, so a plain `cargo test --test acceptance` doubles as a
//! health report: one pass/fail line per guarantee.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vfe::critfield::{break_even, h_n, optimal_n, ModelConstants};
use vfe::fields::{
    biot_savart_circulation, biot_savart_eval, flux_gamma0_ball, ClosedCurve3D,
};
use vfe::geometry::SampledGraph;
use vfe::isoflux::{
    ball_hessian_closed_form, criticality_residual, q_form, q_spectrum, QFormSpec, RatioContext,
};
use vfe::profile::{
    disk_vortex_energy, gamma_from_profile, perforated_renormalized_check, solve_f0,
};
use vfe::quad::uniform_grid;
use vfe::renorm::{
    el_residual, isotropic_polygon_minimum, wn_minimize, EndpointMode, FilamentFamily, WnOptions,
};

fn budget(t0: Instant, limit: Duration, what: &str) {
    let used = t0.elapsed();
    assert!(used <= limit, "{what} took {used:?}, budget {limit:?}");
}

// --- flux of the Meissner field through the displaced meridian ------------

#[test]
fn ball_flux_remainder_is_fifth_order() {
    let t0 = Instant::now();
    let mut k_fit = 0.0_f64;
    for rho in [0.1, 0.05, 0.01] {
        let flux = flux_gamma0_ball(rho).unwrap();
        let leading = rho * rho * rho / 3.0;
        let k = (flux - leading).abs() / (0.5 * rho.powi(5));
        k_fit = k_fit.max(k);
    }
    assert!(k_fit <= 3.0, "remainder coefficient {k_fit}");
    budget(t0, Duration::from_secs(1), "flux sweep");
    println!("flux remainder coefficient k = {k_fit:.6}");
}

// --- second variation of the ratio: three independent routes ---------------

#[test]
fn ball_hessian_routes_agree() {
    let t0 = Instant::now();
    let rho = 0.05;
    let ctx = RatioContext::ball(rho).unwrap();
    let spec = QFormSpec::ball(rho).unwrap();
    let m = 400;
    let z = uniform_grid(-1.0, 1.0, m);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..5 {
        // random smooth meridian variation (x(z), theta(z))
        let a: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let x: Vec<f64> = z
            .iter()
            .map(|&z| 0.7 + 0.25 * (a[0] * (1.0 + a[1] * a[1]) * z).sin() + 0.2 * a[2] * z)
            .collect();
        let th: Vec<f64> = z
            .iter()
            .map(|&z| a[3] * z + 0.3 * (2.0 * z + a[4]).cos() + 0.2 * a[5])
            .collect();
        let closed = ball_hessian_closed_form(rho, &z, &x, &th).unwrap();

        let grid = uniform_grid(0.0, 2.0 * rho, m);
        let u: Vec<[f64; 2]> = x
            .iter()
            .zip(&th)
            .map(|(x, t)| [x * t.cos(), x * t.sin()])
            .collect();
        let dir = SampledGraph::new(grid, u).unwrap();

        let t = 1e-3;
        let r = |t: f64| ctx.ratio(&dir.scaled(t)).unwrap();
        let d2 = (-r(2.0 * t) + 16.0 * r(t) - 30.0 * r(0.0) + 16.0 * r(-t) - r(-2.0 * t))
            / (12.0 * t * t);
        let fd = -d2; // positive for the stable axis

        let rel_closed = (-closed / fd - 1.0).abs();
        assert!(
            rel_closed <= 10.0 * rho,
            "case {case}: closed form off by {rel_closed} ({closed} vs -{fd})"
        );

        let q = q_form(&spec, &dir).unwrap();
        let rel_q = (q / fd - 1.0).abs();
        assert!(rel_q <= 1e-3, "case {case}: q form off by {rel_q} ({q} vs {fd})");
    }
    budget(t0, Duration::from_secs(10), "hessian comparison");
}

// --- the axis is a critical point of the ratio ------------------------------

#[test]
fn axis_criticality_residual_vanishes() {
    let t0 = Instant::now();
    let spec = QFormSpec::ball(0.1).unwrap();
    // the returned residual is the sup over directions, so it dominates any
    // sampled (z, u) pair
    let sup = criticality_residual(&spec, 100).unwrap();
    assert!(sup <= 1e-6, "sup residual {sup}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let s = rng.gen_range(0.0..spec.l0());
        let phi = rng.gen_range(0.0..2.0 * PI);
        let u = [phi.cos(), phi.sin()];
        let lin = spec.field().linear(s);
        let dg = spec.axis().dg33(s);
        let c0 = lin[0] - 0.5 * spec.r0() * dg[0];
        let c1 = lin[1] - 0.5 * spec.r0() * dg[1];
        worst = worst.max((c0 * u[0] + c1 * u[1]).abs());
    }
    assert!(worst <= 1e-6, "directional residual {worst}");
    budget(t0, Duration::from_secs(1), "criticality sampling");
}

// --- coercivity of the second-variation form --------------------------------

#[test]
fn ball_spectrum_is_coercive_and_grid_stable() {
    let t0 = Instant::now();
    let spec = QFormSpec::ball(0.1).unwrap();
    let sp = q_spectrum(&spec, 32).unwrap();
    assert!(sp.lambda_min > 0.0, "lambda_min {}", sp.lambda_min);
    let drift = (sp.lambda_min_refined / sp.lambda_min - 1.0).abs();
    assert!(
        drift <= 0.10,
        "lambda_min moved {drift:.3} under refinement ({} vs {})",
        sp.lambda_min,
        sp.lambda_min_refined
    );
    budget(t0, Duration::from_secs(5), "spectrum");
    println!(
        "lambda_min = {:.6e}, refined {:.6e} (drift {:.2}%)",
        sp.lambda_min,
        sp.lambda_min_refined,
        100.0 * drift
    );
}

// --- unit-tension reduction of the localized form ---------------------------

#[test]
fn unit_tension_identity_holds() {
    let t0 = Instant::now();
    let ctx = RatioContext::ball(0.1).unwrap();
    let l0 = ctx.l0();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..20 {
        let a: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
        let curve = SampledGraph::uniform(l0, 14, |s| {
            let p = PI * s / l0;
            [
                0.2 * (a[0] * p.sin() + a[1] * (2.0 * p).sin() + a[2] * p.cos()),
                0.2 * (a[3] * p.sin() + a[4] * (3.0 * p).sin() + a[5]),
            ]
        });
        let q1 = ctx.q_ell(&curve, 1.0).unwrap();
        let length = vfe::geometry::curve_length(&curve, ctx.chart()).unwrap();
        let ratio = ctx.ratio(&curve).unwrap();
        let lhs = ctx.r0() * q1;
        let rhs = length * (ctx.r0() - ratio);
        assert!(
            (lhs - rhs).abs() <= 1e-10,
            "case {case}: {lhs} vs {rhs} (diff {})",
            (lhs - rhs).abs()
        );
    }
    budget(t0, Duration::from_secs(1), "tension identity");
}

// --- interaction-energy minimizers ------------------------------------------

#[test]
fn filament_minimizers_hit_their_closed_forms() {
    let t0 = Instant::now();
    let spec = QFormSpec::synthetic_isotropic();
    // small enough that the descent floor sits well under the tolerance
    let m = 16;

    let start = FilamentFamily::constant_offsets(1.0, m, &[[0.8, 0.1], [-0.5, -0.3]]).unwrap();
    let out = wn_minimize(&spec, &start, &WnOptions::default()).unwrap();
    let c = out.family.curves();
    let target = 2.0_f64.sqrt();
    let u00 = c[0].u_values()[0];
    for k in 0..=m {
        let a = c[0].u_values()[k];
        let b = c[1].u_values()[k];
        let sep = (a[0] - b[0]).hypot(a[1] - b[1]);
        assert!((sep - target).abs() <= 1e-4, "node {k}: separation {sep}");
        // the minimizing curves are constant in z
        assert!(
            (a[0] - u00[0]).hypot(a[1] - u00[1]) <= 1e-4,
            "node {k} drifts along the filament"
        );
    }
    let res2 = el_residual(&spec, &out.family).unwrap();
    assert!(res2 <= 1e-5, "pair residual {res2}");

    let single = FilamentFamily::constant_offsets(1.0, m, &[[0.3, -0.2]]).unwrap();
    let out1 = wn_minimize(&spec, &single, &WnOptions::default()).unwrap();
    let disp = out1.family.max_displacement();
    assert!(disp <= 1e-6, "single filament displacement {disp}");
    let res1 = el_residual(&spec, &out1.family).unwrap();
    assert!(res1 <= 1e-5, "single residual {res1}");

    budget(t0, Duration::from_secs(30), "minimizers");
    println!("pair residual {res2:.3e}, single displacement {disp:.3e}");
}

// --- clamped pure-kinetic pair vs an independent shooting solve -------------

fn shooting_half_separation(steps: usize) -> Vec<f64> {
    // x'' = -1/(2x), x(0) = x(1) = 1/2: classic RK4 + secant shooting
    let h = 1.0 / steps as f64;
    let f = |x: f64| -0.5 / x;
    let run = |v0: f64| -> (f64, Vec<f64>) {
        let (mut x, mut v) = (0.5, v0);
        let mut path = Vec::with_capacity(steps + 1);
        path.push(x);
        for _ in 0..steps {
            let k1 = (v, f(x));
            let k2 = (v + 0.5 * h * k1.1, f(x + 0.5 * h * k1.0));
            let k3 = (v + 0.5 * h * k2.1, f(x + 0.5 * h * k2.0));
            let k4 = (v + h * k3.1, f(x + h * k3.0));
            x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            path.push(x);
        }
        (x - 0.5, path)
    };
    let (mut a, mut b) = (0.3_f64, 0.6_f64);
    let mut fa = run(a).0;
    let mut fb = run(b).0;
    for _ in 0..80 {
        let c = b - fb * (b - a) / (fb - fa);
        let fc = run(c).0;
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        if fb.abs() < 1e-14 {
            break;
        }
    }
    let _ = fa;
    run(b).1
}

#[test]
fn clamped_pair_matches_independent_shooting() {
    let t0 = Instant::now();
    let m = 64;
    let spec = QFormSpec::pure_kinetic(1.0).unwrap();
    let start = FilamentFamily::constant_offsets(1.0, m, &[[0.5, 0.0], [-0.5, 0.0]]).unwrap();
    let out = wn_minimize(
        &spec,
        &start,
        &WnOptions {
            endpoints: EndpointMode::Clamped,
            grad_tol: 1e-7,
            max_iter: 20_000,
        },
    )
    .unwrap();
    let oracle = shooting_half_separation(128 * m);
    let u0 = out.family.curves()[0].u_values();
    let mut sup = 0.0_f64;
    for k in 0..=m {
        sup = sup.max((u0[k][0] - oracle[128 * k]).abs());
    }
    assert!(sup <= 1e-3, "sup deviation from shooting {sup}");
    budget(t0, Duration::from_secs(60), "clamped pair");
    println!("clamped pair sup deviation {sup:.3e}");
}

// --- vortex-core profile and its energy constant -----------------------------

#[test]
fn core_energy_pipeline_is_consistent() {
    let t0 = Instant::now();
    let p = solve_f0(100.0, 8001).unwrap();
    let g100 = gamma_from_profile(&p, 100.0).unwrap();
    let g50 = gamma_from_profile(&p, 50.0).unwrap();
    assert!(
        (g100 - g50).abs() <= 5e-3,
        "window tail {g100} vs {g50}"
    );

    let fine = solve_f0(100.0, 16001).unwrap();
    let g_fine = gamma_from_profile(&fine, 100.0).unwrap();
    assert!(
        (g_fine - g100).abs() < 1e-4,
        "grid doubling moved the estimate by {}",
        (g_fine - g100).abs()
    );

    let disk = disk_vortex_energy(1e-3, 0.1, &p).unwrap();
    let expected = 2.0 * (PI * 100.0_f64.ln() + g100);
    assert!(
        (disk - expected).abs() <= 2e-2,
        "disk energy {disk} vs {expected}"
    );
    budget(t0, Duration::from_secs(30), "core profile pipeline");
    println!("gamma(100) = {g100:.10}, disk check diff {:.3e}", (disk - expected).abs());
}

// --- perforated-disk renormalized energy -------------------------------------

#[test]
fn perforated_disk_identity_holds() {
    let t0 = Instant::now();
    let two = perforated_renormalized_check(&[[0.05, 0.0], [-0.05, 0.0]], 1.0, 1e-3).unwrap();
    let rel = (two.deviation / two.closed_form).abs();
    assert!(rel <= 0.01, "pair quadrature off by {rel:.3e} relative");

    let one = perforated_renormalized_check(&[[0.0, 0.0]], 1.0, 1e-3).unwrap();
    assert!(
        one.deviation.abs() <= 1e-8,
        "single-hole deviation {}",
        one.deviation
    );
    budget(t0, Duration::from_secs(60), "perforated disk");
    println!("pair relative deviation {rel:.3e}");
}

// --- critical-field ladder algebra -------------------------------------------

#[test]
fn critical_field_ladder_is_consistent() {
    let t0 = Instant::now();
    let (r0, l0, gamma, c_omega) = (0.5, 1.0, 1.1967, 0.8);
    let min_w: Vec<f64> = (0..=5).map(isotropic_polygon_minimum).collect();
    assert_eq!(min_w[1], 0.0);
    let consts = ModelConstants::new(r0, l0, gamma, c_omega, 1.0, min_w).unwrap();
    let eps = 1e-3_f64;

    // one filament: the ladder starts exactly at the closed first-field formula
    let l = -(eps.ln());
    let k1 = (gamma * l0 + c_omega) / (PI * l0);
    let h1_formula = (l + k1) / (2.0 * r0);
    assert_eq!(h_n(1, eps, &consts).unwrap(), h1_formula);

    // break-even fields reproduce the ladder
    for n in 1..=5 {
        let solved = break_even(n, eps, &consts).unwrap();
        let ladder = h_n(n, eps, &consts).unwrap();
        let rel = (solved / ladder - 1.0).abs();
        assert!(rel <= 1e-9, "n={n}: break-even {solved} vs ladder {ladder}");
    }

    // the optimal filament count is a nondecreasing staircase in the field
    let h_lo = 0.5 * h_n(1, eps, &consts).unwrap();
    let h_hi = 1.05 * h_n(5, eps, &consts).unwrap();
    let mut prev = 0usize;
    for i in 0..1000 {
        let h = h_lo + (h_hi - h_lo) * i as f64 / 999.0;
        let n = optimal_n(h, eps, &consts, 5).unwrap();
        assert!(n >= prev, "staircase steps down at h={h}: {prev} -> {n}");
        prev = n;
    }
    assert_eq!(prev, 5, "sweep should end above the last ladder step");
    budget(t0, Duration::from_secs(5), "critical fields");
}

// --- line-field reference values ----------------------------------------------

#[test]
fn line_field_reference_values_hold() {
    let t0 = Instant::now();

    let wire = ClosedCurve3D::regular_polygon([0.0; 3], [0.0, 0.0, 1.0], 1.0, 8192).unwrap();
    let b = biot_savart_eval(&wire, [0.0; 3]).unwrap();
    assert!(b[0].abs() <= 1e-6 && b[1].abs() <= 1e-6, "{b:?}");
    assert!((b[2] - PI).abs() <= 1e-6, "center magnitude {}", b[2]);

    // a loop threading the wire once sees circulation 2 pi
    let n = 4096;
    let mut pts = Vec::with_capacity(n);
    for k in 0..n {
        let t = 2.0 * PI * k as f64 / n as f64;
        pts.push([1.0 + 0.3 * t.cos(), 0.0, 0.3 * t.sin()]);
    }
    let loop_curve = ClosedCurve3D::new(pts).unwrap();
    let wire_coarse = ClosedCurve3D::regular_polygon([0.0; 3], [0.0, 0.0, 1.0], 1.0, 512).unwrap();
    let circ = biot_savart_circulation(&wire_coarse, &loop_curve).unwrap();
    assert!(
        (circ.abs() - 2.0 * PI).abs() <= 1e-4,
        "linking circulation {circ}"
    );

    // the field is divergence-free: finite-difference trace of the Jacobian
    // stays far below the Jacobian's own magnitude
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-5;
    let mut checked = 0;
    while checked < 50 {
        let p = [
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
        ];
        let min_dist = wire_coarse
            .points()
            .iter()
            .map(|q| {
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        if min_dist < 0.3 {
            continue;
        }
        let mut jac = [[0.0_f64; 3]; 3];
        for j in 0..3 {
            let mut up = p;
            let mut dn = p;
            up[j] += h;
            dn[j] -= h;
            let bu = biot_savart_eval(&wire_coarse, up).unwrap();
            let bd = biot_savart_eval(&wire_coarse, dn).unwrap();
            for i in 0..3 {
                jac[i][j] = (bu[i] - bd[i]) / (2.0 * h);
            }
        }
        let div = jac[0][0] + jac[1][1] + jac[2][2];
        let frob: f64 = jac
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let rel = div.abs() / frob;
        assert!(rel <= 1e-3, "divergence {rel:.3e} relative at {p:?}");
        checked += 1;
    }
    budget(t0, Duration::from_secs(5), "line-field references");
}

// --- command-line runs are reproducible ----------------------------------------

#[test]
fn cli_runs_are_deterministic() {
    use std::path::Path;
    use vfe::cli::{run, Args, Command};

    let read_all = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        files
    };

    for (command, sets) in [
        (Command::WnMinimize, vec!["wn.n=2".to_string()]),
        (Command::IsofluxMaximize, vec!["discretization.elements=24".to_string()]),
    ] {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        for dir in [&dir_a, &dir_b] {
            run(&Args {
                command,
                config: None,
                set: sets.clone(),
                out: dir.path().to_path_buf(),
                seed: Some(9),
            })
            .unwrap();
        }
        let a = read_all(dir_a.path());
        let b = read_all(dir_b.path());
        assert!(!a.is_empty(), "{command:?} produced no artifacts");
        assert_eq!(
            a.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            b.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            "{command:?}: artifact lists differ"
        );
        for ((name_a, bytes_a), (_, bytes_b)) in a.iter().zip(&b) {
            assert_eq!(
                bytes_a, bytes_b,
                "{command:?}: {name_a} differs between identical runs"
            );
        }
    }
}
