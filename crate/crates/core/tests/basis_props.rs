mod common;

use proptest::prelude::*;
use qrbsde::basis::BasisContext;
use qrbsde::dist::SamplingMeasure;
use qrbsde::mindex::{IndexKind, MultiIndexSet};

fn context(mu: f64, d: usize, kind: IndexKind) -> BasisContext {
    BasisContext::new(SamplingMeasure::new(mu, d).unwrap(), MultiIndexSet::build(d, kind).unwrap()).unwrap()
}

#[test]
fn quadrature_orthonormality() {
    // mu = 1 gives weight cos^0 in theta, mu = 2 gives cos; both smooth.
    for mu in [1.0, 2.0] {
        for (d, kind) in [
            (1, IndexKind::Full { k: vec![12] }),
            (2, IndexKind::Hyperbolic { deg: 6 }),
            (2, IndexKind::Total { deg: 4 }),
        ] {
            let c = context(mu, d, kind);
            let dev = common::max_identity_deviation(&common::quadrature_gram(&c, 64));
            assert!(dev <= 1e-8, "mu={mu} d={d}: {dev:e}");
        }
    }
}

#[test]
fn shifted_measure_keeps_orthonormality() {
    let c = BasisContext::new(
        SamplingMeasure::with_center(2.0, vec![1.5, -0.5]).unwrap(),
        MultiIndexSet::build(2, IndexKind::Total { deg: 3 }).unwrap(),
    )
    .unwrap();
    assert!(common::max_identity_deviation(&common::quadrature_gram(&c, 48)) <= 1e-8);
}

#[test]
fn monte_carlo_orthonormality() {
    let c = context(2.0, 2, IndexKind::Full { k: vec![3, 3] });
    let dev = common::max_identity_deviation(&common::monte_carlo_gram(&c, 1_000_000, 11));
    assert!(dev <= 5e-3, "{dev:e}");
}

proptest! {
    #[test]
    fn series_is_linear(
        a in prop::collection::vec(-3.0f64..3.0, 27),
        b in prop::collection::vec(-3.0f64..3.0, 27),
        s in -5.0f64..5.0,
        x in prop::collection::vec(-20.0f64..20.0, 2),
    ) {
        let c = context(2.0, 2, IndexKind::Hyperbolic { deg: 6 });
        prop_assert_eq!(c.len(), a.len());
        let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let scaled: Vec<f64> = a.iter().map(|p| s * p).collect();
        let fa = c.eval_series(&a, &x).unwrap();
        let fb = c.eval_series(&b, &x).unwrap();
        prop_assert!((c.eval_series(&sum, &x).unwrap() - fa - fb).abs() <= 1e-12);
        prop_assert!((c.eval_series(&scaled, &x).unwrap() - s * fa).abs() <= 1e-12);
    }

    #[test]
    fn phi_is_bounded_by_christoffel_terms(x in prop::collection::vec(-1e6f64..1e6, 3)) {
        let c = context(2.0, 3, IndexKind::Total { deg: 5 });
        let mut out = vec![0.0; c.len()];
        let mut scratch = c.scratch();
        c.phi_all(&x, &mut scratch, &mut out);
        for (v, k) in out.iter().zip(c.gamma().iter()) {
            let nz = k.iter().filter(|&&e| e != 0).count() as i32;
            prop_assert!(v * v <= 2f64.powi(nz) + 1e-12);
        }
    }
}
