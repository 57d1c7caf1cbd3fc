//! Structure of the stabilisation blocks and the local projection terms.

use lps_hho::cases::ManufacturedCase;
use lps_hho::forms::{
    b_norm_block, convection_block, gamma, normal_jump_block, stabilisation_block,
    StabilisationConstants,
};
use lps_hho::mesh::{generate_mesh, Family, MacroMode};
use lps_hho::projection::PatchFluctuation;
use lps_hho::{Discretization, DiscretizationOptions};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disc(family: Family, level: usize, k: usize, mode: MacroMode) -> Discretization {
    let case = ManufacturedCase::smooth(1e-3);
    Discretization::new(
        generate_mesh(family, level),
        case.coefficients(),
        DiscretizationOptions::new(k).with_macro(mode),
    )
    .unwrap()
}

fn assert_sym_psd(m: &DMatrix<f64>, what: &str) {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    assert!(
        (m - m.transpose()).amax() <= 1e-12 * scale,
        "{what} not symmetric"
    );
    let min = m.clone().symmetric_eigen().eigenvalues.min();
    assert!(min >= -1e-11 * scale, "{what}: min eigenvalue {min:e}");
}

#[test]
fn stabilisation_blocks_are_symmetric_psd() {
    for mode in [MacroMode::Trivial, MacroMode::VertexPatch] {
        for k in 0..3 {
            let d = disc(Family::Hexagonal, 1, k, mode);
            for o in &d.ops {
                assert_sym_psd(&stabilisation_block(o, d.coeffs.epsilon), "S");
                assert_sym_psd(&normal_jump_block(o), "normal jump");
                assert_sym_psd(&b_norm_block(o, 1.0), "b norm");
            }
            for p in &d.patches {
                assert_sym_psd(&p.lps, "LPS");
                assert_sym_psd(&p.pressure_gradient, "pressure gradient");
                assert_sym_psd(&p.fluctuation, "fluctuation Gram");
            }
        }
    }
}

#[test]
fn pressure_gradient_term_vanishes_for_trivial_macros() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for family in Family::ALL {
        for k in 0..4 {
            let d = disc(family, 1, k, MacroMode::Trivial);
            for p in &d.patches {
                assert!(p.pressure_gradient.amax() < 1e-12, "{family} k={k}");
            }
            let p = d.pressure_from_fn(|| rng.random_range(-1.0..1.0));
            let u = lps_hho::HybridVelocity::zeros(&d.mesh, k);
            // only B_G acts on (0, p) x (0, p)
            let a = d.bilinear_form((&u, &p), (&u, &p));
            assert!(a.abs() < 1e-12, "{family} k={k}: {a:e}");
        }
    }
}

#[test]
fn pressure_gradient_term_sees_jumps_on_vertex_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = disc(Family::Cartesian, 1, 1, MacroMode::VertexPatch);
    let p = d.pressure_from_fn(|| rng.random_range(-1.0..1.0));
    let total: f64 = (0..d.patches.len())
        .map(|m| {
            let q = d.gather_patch_pressure(m, &p);
            q.dot(&(&d.patches[m].pressure_gradient * &q))
        })
        .sum();
    assert!(total > 1e-6);
}

/// Patch blocks against point evaluations of `K_M` applied to the
/// reconstructed fields.
#[test]
fn patch_blocks_match_pointwise_fluctuation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for mode in [MacroMode::Trivial, MacroMode::VertexPatch] {
        for k in 1..3 {
            let d = disc(Family::Triangular, 1, k, mode);
            let u = d.velocity_from_fn(false, || rng.random_range(-1.0..1.0));
            let p = d.pressure_from_fn(|| rng.random_range(-1.0..1.0));
            for (m, patch) in d.macros.patches.iter().enumerate() {
                let pp = &d.params.patches[m];
                let quads: Vec<_> = patch.cells.iter().map(|&c| &d.ops[c].quad).collect();
                let kernel = PatchFluctuation::new(patch, &quads, k).unwrap();
                let q = kernel.quadrature();
                let mut lps = 0.0;
                let mut grad = 0.0;
                for comp in 0..2 {
                    let mut adv = Vec::with_capacity(q.len());
                    let mut dp = Vec::with_capacity(q.len());
                    for (i, &c) in patch.cells.iter().enumerate() {
                        let o = &d.ops[c];
                        let nc = o.nc();
                        let g = o.reconstruct_advection_constant(&d.gather(c, &u), pp.b_mean);
                        let gc: DVector<f64> = g.rows(comp * nc, nc).into_owned();
                        for j in kernel.cell_range(i) {
                            let x = q.points[j];
                            adv.push(o.basis.eval(&gc, x));
                            let (gx, gy) = o.basis.gradients(x);
                            let gq = if comp == 0 { gx } else { gy };
                            dp.push(gq.rows(0, nc).dot(&p.cells[c]));
                        }
                    }
                    let ka = kernel.apply(&adv);
                    let kp = kernel.apply(&dp);
                    for ((w, a), b) in q.weights.iter().zip(&ka).zip(&kp) {
                        lps += w * a * a;
                        grad += w * b * b;
                    }
                }
                let ub = d.gather_patch(m, &u);
                let pb = d.gather_patch_pressure(m, &p);
                let got_lps = ub.dot(&(&d.patches[m].lps * &ub));
                let got_grad = pb.dot(&(&d.patches[m].pressure_gradient * &pb));
                let (want_lps, want_grad) = (pp.tau * lps, pp.rho * grad);
                assert!(
                    (got_lps - want_lps).abs() <= 1e-10 * want_lps.max(1e-3),
                    "{mode} k={k}: {got_lps:e} vs {want_lps:e}"
                );
                assert!(
                    (got_grad - want_grad).abs() <= 1e-10 * want_grad.max(1e-3),
                    "{mode} k={k}: {got_grad:e} vs {want_grad:e}"
                );
            }
        }
    }
}

#[test]
fn global_convection_identity_on_homogeneous_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for family in Family::ALL {
        for k in 0..3 {
            let d = disc(family, 1, k, MacroMode::Trivial);
            let u = d.velocity_from_fn(true, || rng.random_range(-1.0..1.0));
            let (mut a, mut b) = (0.0, 0.0);
            for (c, o) in d.ops.iter().enumerate() {
                let v = d.gather(c, &u);
                a += v.dot(&(convection_block(o, 1.0) * &v));
                b += v.dot(&(b_norm_block(o, 1.0) * &v));
            }
            assert!((a - b).abs() < 1e-11 * b, "{family} k={k}: {a} vs {b}");
        }
    }
}

#[test]
fn stabilisation_parameters_follow_their_scalings() {
    let constants = StabilisationConstants {
        c_tau: 0.7,
        c_rho: 2.0,
        ..StabilisationConstants::default()
    };
    for mode in [MacroMode::Trivial, MacroMode::VertexPatch] {
        let case = ManufacturedCase::smooth(1e-4);
        let d = Discretization::new(
            generate_mesh(Family::Hexagonal, 1),
            case.coefficients(),
            DiscretizationOptions::new(1)
                .with_macro(mode)
                .with_constants(constants),
        )
        .unwrap();
        assert_eq!(d.params.omega, 0.0);
        for (patch, pp) in d.macros.patches.iter().zip(&d.params.patches) {
            assert!((pp.b_mean - nalgebra::Vector2::new(1.0, 1.0)).norm() < 1e-13);
            assert!((pp.b_max - 2f64.sqrt()).abs() < 1e-13);
            assert!(pp.tau * pp.b_max <= 0.7 * patch.diameter * (1.0 + 1e-14));
            assert!((pp.rho - 2.0 * patch.diameter).abs() < 1e-14);
            let h = patch.diameter;
            let closed = h * h / (1e-4 + (1.0 + 2f64.sqrt()) * h + h * h);
            assert!((pp.gamma - closed).abs() < 1e-15);
            assert!((gamma(h, 2f64.sqrt(), 1e-4, 1.0) - closed).abs() < 1e-15);
        }
    }
}
