//! Property tests for the algebraic invariants of the configuration
//! space machinery: gluing inverts projection, projection is linear, the
//! inner product is positive definite, and quadrature converges.

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use dynloc_core::field::FieldConfig;
use dynloc_core::mesh::Mesh;
use dynloc_core::metric::SuperMetric;
use dynloc_core::region::RegionDecomposition;

fn circle_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn glue_inverts_projection(values in circle_values(24), split in 3usize..20) {
        let mesh = Arc::new(Mesh::circle(24, 2.0 * PI).unwrap());
        let selected: Vec<usize> = (1..split).collect();
        let dec = RegionDecomposition::from_selected(mesh.clone(), &selected).unwrap();
        let f = FieldConfig::new(mesh, values).unwrap();
        let fo = dec.project_o(&f).unwrap();
        let fnn = dec.project_n(&f).unwrap();
        let glued = dec.glue(&fo, &fnn).unwrap();
        prop_assert_eq!(glued.values(), f.values());
    }

    #[test]
    fn projection_is_linear(
        u in circle_values(24),
        v in circle_values(24),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let mesh = Arc::new(Mesh::circle(24, 2.0 * PI).unwrap());
        let dec = RegionDecomposition::decompose(mesh.clone(), |p| p[0] < PI).unwrap();
        let fu = FieldConfig::new(mesh.clone(), u).unwrap();
        let fv = FieldConfig::new(mesh, v).unwrap();
        let combo = fu.scaled(a).add_scaled(&fv, b).unwrap();
        let lhs = dec.project_o(&combo).unwrap();
        let rhs = dec
            .project_o(&fu)
            .unwrap()
            .scaled(a)
            .add_scaled(&dec.project_o(&fv).unwrap(), b)
            .unwrap();
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn inner_product_is_positive_definite(values in circle_values(24)) {
        let mesh = Arc::new(Mesh::circle(24, 2.0 * PI).unwrap());
        let f = FieldConfig::new(mesh.clone(), values).unwrap();
        let base = FieldConfig::zeros(mesh);
        let ip = SuperMetric::FlatL2.inner_product(&f, &f, &base).unwrap();
        prop_assert!(ip >= 0.0);
        let nonzero = f.values().iter().any(|v| *v != 0.0);
        if nonzero {
            prop_assert!(ip > 0.0);
        } else {
            prop_assert_eq!(ip, 0.0);
        }
    }

    #[test]
    fn inner_product_is_symmetric_bilinear(
        u in circle_values(16),
        v in circle_values(16),
        s in -3.0f64..3.0,
    ) {
        let mesh = Arc::new(Mesh::circle(16, 2.0 * PI).unwrap());
        let fu = FieldConfig::new(mesh.clone(), u).unwrap();
        let fv = FieldConfig::new(mesh.clone(), v).unwrap();
        let base = FieldConfig::zeros(mesh);
        let m = SuperMetric::FlatL2;
        let uv = m.inner_product(&fu, &fv, &base).unwrap();
        let vu = m.inner_product(&fv, &fu, &base).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(1.0));
        let su_v = m.inner_product(&fu.scaled(s), &fv, &base).unwrap();
        prop_assert!((su_v - s * uv).abs() <= 1e-10 * su_v.abs().max(1.0));
    }
}

#[test]
fn interval_quadrature_converges_at_second_order() {
    // Trapezoid on [0, L]: error O(h²) for smooth integrands.
    let integral = |n: usize| {
        let mesh = Arc::new(Mesh::interval(n, 1.0).unwrap());
        let f = FieldConfig::from_fn(mesh.clone(), |_, p| (p[0] * p[0]) * p[0].exp());
        let one = FieldConfig::constant(mesh.clone(), 1.0);
        let base = FieldConfig::zeros(mesh);
        SuperMetric::FlatL2.inner_product(&f, &one, &base).unwrap()
    };
    // ∫₀¹ x² eˣ dx = e − 2.
    let exact = std::f64::consts::E - 2.0;
    let e1 = (integral(33) - exact).abs();
    let e2 = (integral(65) - exact).abs();
    let order = (e1 / e2).log2();
    assert!(
        (order - 2.0).abs() < 0.2,
        "observed quadrature order {order}"
    );
}
