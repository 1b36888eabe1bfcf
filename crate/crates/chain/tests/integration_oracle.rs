//! Check the Euler integrator against the exact solution of the underlying
//! linear system, derived independently here by eigendecomposition.

use synapse_chain::{ChainArray, ChainConfig};

/// Exact state at time `t` of the two-level system
///   C0 u0' = g0 (u1 - u0)
///   C1 u1' = g0 (u0 - u1) + g1 (0 - u1)
/// with C0=1, C1=2, g0=g, g1=g/2.
fn analytic_two_level(g: f64, u0: [f64; 2], t: f64) -> [f64; 2] {
    let a = [[-g, g], [g / 2.0, -0.75 * g]];
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    // Eigenvectors (a01, l - a00) for each eigenvalue l.
    let v1 = [a[0][1], l1 - a[0][0]];
    let v2 = [a[0][1], l2 - a[0][0]];
    // Solve [v1 v2] c = u0.
    let den = v1[0] * v2[1] - v2[0] * v1[1];
    let c1 = (u0[0] * v2[1] - v2[0] * u0[1]) / den;
    let c2 = (v1[0] * u0[1] - u0[0] * v1[1]) / den;
    let e1 = (l1 * t).exp();
    let e2 = (l2 * t).exp();
    [
        c1 * e1 * v1[0] + c2 * e2 * v2[0],
        c1 * e1 * v1[1] + c2 * e2 * v2[1],
    ]
}

#[test]
fn fine_step_euler_converges_to_the_exact_flow() {
    let g = 0.5;
    let u0 = [1.0, 0.3];
    let t_final = 2.0f64;
    let dt = 1e-3f64;
    let steps = (t_final / dt).round() as u64;

    let cfg = ChainConfig {
        n_levels: 2,
        g12: g,
        dt,
        gating: false,
    };
    let mut arr = ChainArray::from_levels(cfg, 1, vec![u0[0], u0[1]], 0).unwrap();
    arr.consolidate(steps, None).unwrap();

    let exact = analytic_two_level(g, u0, t_final);
    for (k, &want) in exact.iter().enumerate() {
        let got = arr.level(k)[0];
        let rel = (got - want).abs() / want.abs().max(1e-9);
        assert!(
            rel < 1e-3,
            "level {k}: euler {got}, analytic {want}, rel {rel:.2e}"
        );
    }

    // Halving dt should roughly halve the error (first-order method).
    let cfg2 = ChainConfig {
        n_levels: 2,
        g12: g,
        dt: dt / 2.0,
        gating: false,
    };
    let mut arr2 = ChainArray::from_levels(cfg2, 1, vec![u0[0], u0[1]], 0).unwrap();
    arr2.consolidate(steps * 2, None).unwrap();
    let err1 = (arr.level(0)[0] - exact[0]).abs();
    let err2 = (arr2.level(0)[0] - exact[0]).abs();
    assert!(
        err2 < 0.75 * err1,
        "halving dt did not shrink the error: {err1:.3e} -> {err2:.3e}"
    );
}
