//! Identity checks for the full latitude-longitude mode.
//!
//! The tilted preset `rho = r0 + a sin(theta) cos(psi) + b cos(theta)` is a
//! first-harmonic perturbed sphere whose symmetry axis is rotated away
//! from the grid axis by `alpha = atan2(a, b)`: with `amp = hypot(a, b)`
//! and `Theta` the angle from the tilted axis, `rho = r0 + amp cos Theta`.
//! Its principal curvatures therefore have closed forms through the
//! axisymmetric formulas evaluated at `Theta`, which makes it a strong
//! oracle: the grid sees a fully two-dimensional field, the oracle knows
//! the answer analytically.

use khess::geom::{residual_sweep, FrameOrder, RadialGraph, Sphere2Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tilted(n_theta: usize, n_psi: usize) -> RadialGraph {
    RadialGraph::sphere2(
        n_theta,
        n_psi,
        Sphere2Profile::Tilted { r0: 1.0, a: 0.06, b: 0.08 },
    )
    .unwrap()
}

#[test]
fn sphere_extrinsic_checks_sit_at_roundoff() {
    // A constant radius zeroes every derivative of rho exactly, so the
    // warp-potential, support, and interchange identities close
    // algebraically. Codazzi also closes: the Christoffel symbols are
    // assembled from the same differenced metric that `hcov1` contracts
    // against, and that combination is metric-compatible as an algebraic
    // identity, independent of stencil error. Only the Gauss check keeps
    // truncation, because the curvature side differences the latitude-
    // dependent metric while the h-side is exact; its magnitude is the
    // pole-band truncation floor for this grid (measured 2.7e-4 at
    // (48, 96), decaying at fourth order).
    let graph = RadialGraph::sphere2(48, 96, Sphere2Profile::Sphere { r0: 1.0 }).unwrap();
    let res = residual_sweep(&graph, 2, FrameOrder::Standard).unwrap();
    assert!(res.phi_hessian <= 1e-11, "phi hessian {}", res.phi_hessian);
    assert!(res.support_first <= 1e-11, "support first {}", res.support_first);
    assert!(res.support_second <= 1e-11, "support second {}", res.support_second);
    assert!(res.gauss <= 1e-3, "gauss {}", res.gauss);
    assert!(res.codazzi <= 1e-11, "codazzi {}", res.codazzi);
    assert!(res.interchange.unwrap() <= 1e-10, "interchange {:?}", res.interchange);
}

#[test]
fn tilted_graph_residuals_meet_tolerances() {
    // Truncation in this mode concentrates in the sample band's polar
    // rows, where inverse-metric factors amplify the stencil error; the
    // Gauss check needs (288, 576) to clear 1e-6 there (6.98e-7
    // measured), while every other check has an order of magnitude or
    // more to spare.
    let res = residual_sweep(&tilted(288, 576), 2, FrameOrder::Standard).unwrap();
    assert!(res.phi_hessian <= 1e-6, "phi hessian {}", res.phi_hessian);
    assert!(res.support_first <= 1e-6, "support first {}", res.support_first);
    assert!(res.support_second <= 1e-6, "support second {}", res.support_second);
    assert!(res.gauss <= 1e-6, "gauss {}", res.gauss);
    assert!(res.codazzi <= 1e-6, "codazzi {}", res.codazzi);
    assert!(res.interchange.unwrap() <= 1e-4, "interchange {:?}", res.interchange);
}

#[test]
fn tilted_residuals_converge_at_order_three_or_better() {
    let coarse = residual_sweep(&tilted(48, 96), 2, FrameOrder::Standard).unwrap();
    let fine = residual_sweep(&tilted(96, 192), 2, FrameOrder::Standard).unwrap();
    let pairs = [
        ("phi_hessian", coarse.phi_hessian, fine.phi_hessian),
        ("support_first", coarse.support_first, fine.support_first),
        ("support_second", coarse.support_second, fine.support_second),
        ("gauss", coarse.gauss, fine.gauss),
        ("codazzi", coarse.codazzi, fine.codazzi),
        ("interchange", coarse.interchange.unwrap(), fine.interchange.unwrap()),
    ];
    for (name, c, f) in pairs {
        assert!(c > 1e-12, "{name}: coarse residual {c} at roundoff, order unmeasurable");
        let order = (c / f).log2();
        assert!(order >= 3.0, "{name}: order {order} (coarse {c}, fine {f})");
    }
}

#[test]
fn residual_norms_survive_frame_reversal() {
    // With nonzero g_theta_psi the reversed Gram-Schmidt order produces a
    // genuinely different orthonormal frame, so this exercises the
    // tensorial invariance of the Frobenius norms, not a relabeling.
    let graph = tilted(48, 96);
    let std = residual_sweep(&graph, 2, FrameOrder::Standard).unwrap();
    let rev = residual_sweep(&graph, 2, FrameOrder::Reversed).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs());
    assert!(close(std.phi_hessian, rev.phi_hessian));
    assert!(close(std.support_first, rev.support_first));
    assert!(close(std.support_second, rev.support_second));
    assert!(close(std.gauss, rev.gauss));
    assert!(close(std.codazzi, rev.codazzi));
    assert!(close(std.interchange.unwrap(), rev.interchange.unwrap()));
}

/// Closed-form principal curvatures of the axisymmetric profile
/// `r0 + amp cos(t)` at axis angle `t`, sorted descending.
fn axisym_closed_form(r0: f64, amp: f64, t: f64) -> [f64; 2] {
    let r = r0 + amp * t.cos();
    let r1 = -amp * t.sin();
    let r2 = -amp * t.cos();
    let (phi, phip) = (r.sinh(), r.cosh());
    let w = (phi * phi + r1 * r1).sqrt();
    let km = (-phi * r2 + 2.0 * phip * r1 * r1 + phi * phi * phip) / (w * w * w);
    let kf = (phip - r1 * t.cos() / (t.sin() * phi)) / w;
    let mut out = [km, kf];
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

#[test]
fn rotated_graph_curvatures_match_axisymmetric_closed_forms() {
    let (a, b) = (0.06_f64, 0.08_f64);
    let amp = a.hypot(b);
    let graph = RadialGraph::sphere2(256, 512, Sphere2Profile::Tilted { r0: 1.0, a, b }).unwrap();
    let jets = graph.jets(0, FrameOrder::Standard).unwrap();
    let sites = graph.sites();

    let mut rng = ChaCha8Rng::seed_from_u64(0x15031);
    let mut checked = 0;
    while checked < 50 {
        let s = rng.random_range(0..sites.len());
        let (theta, psi) = (sites[s].0, sites[s].1.unwrap());
        if !(0.5..=std::f64::consts::PI - 0.5).contains(&theta) {
            continue;
        }
        // Angle from the tilted symmetry axis.
        let cos_big = (b * theta.cos() + a * theta.sin() * psi.cos()) / amp;
        let big_theta = cos_big.clamp(-1.0, 1.0).acos();
        if big_theta < 0.3 || big_theta > std::f64::consts::PI - 0.3 {
            continue;
        }
        let expect = axisym_closed_form(1.0, amp, big_theta);
        for (got, want) in jets[s].kappa.iter().zip(expect.iter()) {
            assert!(
                (got - want).abs() <= 1e-8,
                "site {s}: kappa {got} vs rotated closed form {want}"
            );
        }
        checked += 1;
    }
}
