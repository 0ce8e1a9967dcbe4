//! Independent oracles for the planar marginal machinery: the singular-value
//! definition of the trace distance, the pure-state closed form, positivity
//! and trace bookkeeping, the factorized-state identity, and the scaling
//! ladder's closed form.

mod common;

use dimred_nls_core::reduction::{scaling_ladder, trace_distance, ReducedDensity};
use dimred_nls_core::sampling::{gaussian_field_2d, gaussian_field_3d, rng_from_seed};
use dimred_nls_core::{Field3D, SlabGrid, TorusGrid};

#[test]
fn trace_distance_matches_singular_values_of_the_difference() {
    let grid = SlabGrid::new(8, 5).unwrap();
    let mut rng = rng_from_seed(13);
    let a = gaussian_field_3d(&grid, 2.0, 2, 3, &mut rng)
        .unwrap()
        .normalized()
        .unwrap();
    let b = gaussian_field_3d(&grid, 2.0, 2, 3, &mut rng)
        .unwrap()
        .normalized()
        .unwrap();
    let ga = ReducedDensity::from_field_3d(&a, 6, 3).unwrap();
    let gb = ReducedDensity::from_field_3d(&b, 6, 3).unwrap();

    let library = trace_distance(&ga, &gb).unwrap();
    let diff = ga.matrix() - gb.matrix();
    // Tr|γa − γb|: the sum of singular values of the difference.
    let oracle = diff.svd(false, false).singular_values.iter().sum::<f64>();
    assert!(
        (library - oracle).abs() < 1e-10,
        "library {library} vs SVD oracle {oracle}"
    );
}

/// For rank-one marginals of fully retained normalized states the trace
/// distance Tr|·| has the closed form 2√(1 − |⟨φ, ψ⟩|²).
#[test]
fn pure_state_distance_matches_closed_form() {
    let grid = TorusGrid::new(12).unwrap();
    let mut rng = rng_from_seed(29);
    // Band |k| ≤ 2 fits inside the retained band {−3, …, 2}.
    let phi = gaussian_field_2d(&grid, 2.0, 2, &mut rng)
        .unwrap()
        .normalized()
        .unwrap();
    let psi = gaussian_field_2d(&grid, 2.0, 2, &mut rng)
        .unwrap()
        .normalized()
        .unwrap();
    let gp = ReducedDensity::from_field_2d(&phi, 6).unwrap();
    let gq = ReducedDensity::from_field_2d(&psi, 6).unwrap();

    let overlap = phi.inner_product(&psi).unwrap().norm();
    let oracle = 2.0 * (1.0 - overlap * overlap).max(0.0).sqrt();
    let library = trace_distance(&gp, &gq).unwrap();
    assert!(
        (library - oracle).abs() < 1e-10,
        "library {library} vs closed form {oracle}"
    );
}

#[test]
fn marginals_are_positive_with_the_state_mass_as_trace() {
    let grid = SlabGrid::new(8, 6).unwrap();
    for seed in 0..10u64 {
        let mut rng = rng_from_seed(100 + seed);
        let psi = gaussian_field_3d(&grid, 2.0, 2, 3, &mut rng)
            .unwrap()
            .normalized()
            .unwrap();
        // Retaining the full sampled band catches all of the unit mass.
        let gamma = ReducedDensity::from_field_3d(&psi, 6, 3).unwrap();
        assert!((gamma.trace() - 1.0).abs() < 1e-12, "trace {}", gamma.trace());
        let eigenvalues = gamma.eigenvalues();
        assert!(
            eigenvalues.iter().all(|&l| l >= -1e-12),
            "negative eigenvalue in {eigenvalues:?}"
        );
        assert!((eigenvalues.iter().sum::<f64>() - gamma.trace()).abs() < 1e-10);
    }
}

/// A slab state factorized over the transverse ground mode has exactly the
/// marginal of its planar profile — the fully reduced description loses
/// nothing.
#[test]
fn factorized_state_marginal_equals_planar_marginal() {
    let slab = SlabGrid::new(12, 8).unwrap();
    let mut rng = rng_from_seed(37);
    let phi = gaussian_field_2d(slab.torus(), 2.0, 3, &mut rng)
        .unwrap()
        .normalized()
        .unwrap();
    let psi = Field3D::from_transverse_mode(&phi, slab.clone(), 1).unwrap();

    let g3 = ReducedDensity::from_field_3d(&psi, 8, 4).unwrap();
    let g2 = ReducedDensity::from_field_2d(&phi, 8).unwrap();
    let distance = trace_distance(&g3, &g2).unwrap();
    assert!(distance < 1e-12, "distance {distance:e}");

    // An excited transverse mode is orthogonal as a state but has the same
    // planar marginal.
    let psi2 = Field3D::from_transverse_mode(&phi, slab, 2).unwrap();
    let g3b = ReducedDensity::from_field_3d(&psi2, 8, 4).unwrap();
    assert!(trace_distance(&g3b, &g2).unwrap() < 1e-12);
}

/// Particle numbers along the ladder follow N = c^{1/β} L^{1−1/β} and the
/// scaled parameters reproduce c exactly.
#[test]
fn ladder_follows_the_scaling_closed_form() {
    let beta = 0.25;
    let c = 0.9;
    let l_values = [0.5, 0.25, 0.125, 0.0625];
    let ladder = scaling_ladder(beta, c, &l_values).unwrap();
    assert_eq!(ladder.len(), l_values.len());
    for (params, &l) in ladder.iter().zip(&l_values) {
        let expected_n = c.powf(1.0 / beta) * l.powf(1.0 - 1.0 / beta);
        assert!(
            (params.n() - expected_n).abs() < 1e-12 * expected_n,
            "N({l}) = {} vs {expected_n}",
            params.n()
        );
        assert!((params.c() - c).abs() < 1e-12);
        assert!((params.l() - l).abs() < 1e-15);
    }
    // Thinner slabs need more particles at fixed c.
    for pair in ladder.windows(2) {
        assert!(pair[1].n() > pair[0].n());
    }
}
