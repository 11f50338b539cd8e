use nalgebra::DMatrix;
use seslab_core::basis::{
    basis_filter, build_basis, build_basis_with, hermite, hermite_gaussian, sample_filter, ScaleSet, DEFAULT_PIXEL_SCALE,
};
use seslab_core::tensor::io::read_tensor;

/// Probabilist's Hermite polynomials written out term by term.
fn explicit(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        2 => x.powi(2) - 1.0,
        3 => x.powi(3) - 3.0 * x,
        4 => x.powi(4) - 6.0 * x.powi(2) + 3.0,
        5 => x.powi(5) - 10.0 * x.powi(3) + 15.0 * x,
        6 => x.powi(6) - 15.0 * x.powi(4) + 45.0 * x.powi(2) - 15.0,
        7 => x.powi(7) - 21.0 * x.powi(5) + 105.0 * x.powi(3) - 105.0 * x,
        _ => unreachable!(),
    }
}

fn probe_points() -> impl Iterator<Item = f64> {
    (0..=100).map(|i| -5.0 + 0.1 * i as f64)
}

#[test]
fn recurrence_matches_explicit_polynomials() {
    for n in 0..=7 {
        for x in probe_points() {
            let (a, b) = (hermite(n, x).unwrap(), explicit(n, x));
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "H_{n}({x}): {a} vs {b}");
        }
    }
}

#[test]
fn recurrence_identity_on_explicit_polynomials() {
    for n in 1..=6u32 {
        for x in probe_points() {
            let residual = explicit(n + 1, x) - x * explicit(n, x) + f64::from(n) * explicit(n - 1, x);
            assert!(residual.abs() <= 1e-9, "n={n} x={x}: {residual}");
        }
    }
}

#[test]
fn dilation_covariance_off_grid() {
    let points = [(0.37, -1.21), (2.5, 0.13), (-3.3, 2.71), (0.01, 0.02), (-1.49, -0.77)];
    for n in 0..=6 {
        for m in 0..=6 {
            for sigma in [0.7, 1.0, 1.5, 2.3] {
                for s in [0.6, 1.0 / 1.1, 1.25, 2.0] {
                    for &(u, v) in &points {
                        let lhs = hermite_gaussian(s * sigma, n, m, s * u, s * v) * s * s;
                        let rhs = hermite_gaussian(sigma, n, m, u, v);
                        assert!((lhs - rhs).abs() <= 1e-12, "({n},{m}) sigma={sigma} s={s}: {lhs} vs {rhs}");
                    }
                }
            }
        }
    }
}

#[test]
fn sampled_member_matches_independent_evaluation() {
    // H_2(x) = x^2 - 1, written out without the recurrence.
    let sigma = 1.5;
    let raw = sample_filter(sigma, 2, 2, 7).unwrap();
    for row in 0..7 {
        for col in 0..7 {
            let (u, v) = (col as f64 - 3.0, row as f64 - 3.0);
            let (a, b) = (u / sigma, v / sigma);
            let expect = (a * a - 1.0) * (b * b - 1.0) * (-(u * u + v * v) / (sigma * sigma)).exp() / (sigma * sigma);
            assert!((raw.at(row, col) - expect).abs() <= 1e-12);
        }
    }
    let unit = basis_filter(sigma, 2, 2, 7).unwrap();
    let a = raw.l2_norm();
    assert!(unit.scale(a).max_abs_diff(&raw) <= 1e-12);
    assert!((unit.l2_norm() - 1.0).abs() <= 1e-12);
}

#[test]
fn every_member_of_a_single_scale_basis_has_unit_norm() {
    let basis = build_basis(&ScaleSet::from_alpha(0.1, 1).unwrap(), 6, 7).unwrap();
    for b in 0..basis.num_members() {
        assert!((basis.filter(0, b).l2_norm() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn multi_scale_members_follow_the_inverse_square_law() {
    // The amplitude is shared across scales, so each smaller-scale member is
    // exactly the closed form at its own width times the reference amplitude.
    let scales = ScaleSet::from_alpha(0.1, 3).unwrap();
    let basis = build_basis(&scales, 6, 7).unwrap();
    assert!(basis.normalization_residual() <= 1e-12);
    for (b, &(n, m)) in basis.orders().iter().enumerate() {
        let amplitude = basis.filter(2, b).at(3, 3) / hermite_gaussian(DEFAULT_PIXEL_SCALE, n, m, 0.0, 0.0);
        if !amplitude.is_finite() {
            continue; // odd orders vanish at the center
        }
        for s in 0..2 {
            let sigma = scales.sigmas()[s] * DEFAULT_PIXEL_SCALE;
            let expect = amplitude * hermite_gaussian(sigma, n, m, 0.0, 0.0);
            assert!((basis.filter(s, b).at(3, 3) - expect).abs() <= 1e-12);
        }
    }
}

/// Smallest singular value of the 49 x 49 matrix whose rows are the flattened members.
fn smallest_singular_value(members: &[f64]) -> f64 {
    DMatrix::from_row_slice(49, 49, members).singular_values().min()
}

#[test]
fn members_are_linearly_independent_at_every_scale() {
    let basis = build_basis(&ScaleSet::from_alpha(0.1, 3).unwrap(), 6, 7).unwrap();
    for s in 0..3 {
        let smallest = smallest_singular_value(basis.filters().sub(s).data());
        assert!(smallest > 1e-8, "scale {s}: smallest singular value {smallest:e}");
    }
}

#[test]
fn unit_pixel_scale_is_nearly_singular() {
    // At sigma = 1 px the high orders alias on 7x7 pixels and the smallest
    // member scale loses almost all independence.
    let basis = build_basis_with(&ScaleSet::from_alpha(0.1, 3).unwrap(), 6, 7, 1.0).unwrap();
    let smallest = smallest_singular_value(basis.filters().sub(0).data());
    assert!(smallest < 1e-7, "{smallest:e}");
}

#[test]
fn export_records_basis_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("basis.f64");
    let basis = build_basis(&ScaleSet::from_alpha(0.1, 3).unwrap(), 6, 7).unwrap();
    basis.export(&path).unwrap();
    let (grid, header) = read_tensor(&path).unwrap();
    assert!(grid.bit_eq(basis.filters()));
    assert_eq!(header.shape, vec![3, 49, 7, 7]);
    assert_eq!(header.extra["k"], 7);
    assert_eq!(header.extra["sigmas"].as_array().unwrap().len(), 3);
    assert_eq!(header.extra["orders"][1], serde_json::json!([0, 1]));
}
