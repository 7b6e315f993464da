use qrbsde_demo::{basis_rows, index_pairs, solve_curve};

#[test]
fn basis_rows_shape_and_values() {
    let rows = basis_rows(2.0, 4, -5.0, 5.0, 101).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.len() == 101));
    // density peak c_2 = 1/2 at the origin
    assert!((rows[0][50] - 0.5).abs() < 1e-12);
    assert!(rows[1].iter().all(|&v| v == 1.0));
    // phi_1(0) = sqrt(2) cos(pi/2) = 0
    assert!(rows[2][50].abs() < 1e-12);
    assert!(basis_rows(2.0, 4, 1.0, 1.0, 10).is_err());
    assert!(basis_rows(-1.0, 4, 0.0, 1.0, 10).is_err());
}

#[test]
fn index_pairs_match_cardinalities() {
    assert_eq!(index_pairs("total", 20).unwrap().len(), 231);
    assert_eq!(index_pairs("hyperbolic", 19).unwrap().len(), 99);
    assert_eq!(index_pairs("full", 3).unwrap().len(), 16);
    let h = index_pairs("hyperbolic", 6).unwrap();
    assert!(h.iter().all(|&(a, b)| a.max(1) * b.max(1) <= 6));
    assert!(index_pairs("sparse", 3).is_err());
}

#[test]
fn small_solve_tracks_exact_solution() {
    let c = solve_curve(2.1, 40, 4000, 10, 3, 25).unwrap();
    assert_eq!(c.xs.len(), 25);
    // undamped errors grow like (1+x^2)^{q/2} away from the origin
    let worst = c
        .xs
        .iter()
        .zip(c.estimate.iter().zip(&c.exact))
        .filter(|(x, _)| x.abs() <= 2.0)
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.3, "{worst}");
    assert!(c.mse_av.is_finite() && c.mse_max >= c.mse_av);
    assert!(solve_curve(0.0, 1000, 1_000_000, 100, 1, 10).is_err());
}
