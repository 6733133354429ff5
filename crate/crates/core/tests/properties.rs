mod common;

use proptest::prelude::*;

use skelink_core::config_model::{parse_document, serialize_document, ConfigDocument, Configuration, Similarity};
use skelink_core::flow::{chi, evolve_curvature};
use skelink_core::geom::pt;
use skelink_core::pipeline::{analyze, PipelineParams};
use skelink_core::proximity_graph::{
    proximity_weights, renormalize, renormalized_weights, tiered_graph_from, ProximityMatrix, Variant,
};

#[test]
fn random_configurations_satisfy_every_property() {
    for seed in 0..20 {
        let doc = common::random_document(seed);
        let bad = common::check_properties(&doc);
        assert!(bad.is_empty(), "seed {seed}: {bad:#?}");
    }
}

#[test]
fn invariants_vary_continuously() {
    for seed in [3, 7, 11] {
        let doc = common::random_document(seed);
        let region = common::region_of(&doc);
        let a = analyze(&doc.configuration, &region, &PipelineParams::default()).unwrap();
        // δ is taken per object, from that object's own diameter
        let moved: Vec<Vec<_>> = doc
            .configuration
            .objects
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let v = c.vertices();
                let diameter = v.iter().flat_map(|p| v.iter().map(move |q| p.dist(*q))).fold(0.0, f64::max);
                let delta = 1e-3 * diameter;
                v.iter().enumerate().map(|(k, &p)| p + pt(1.0, 0.0).rotate((i * 31 + k * 7) as f64) * delta).collect()
            })
            .collect();
        let b = analyze(&Configuration::new(moved).unwrap(), &region, &PipelineParams::default()).unwrap();
        let change = common::invariant_change(&a, &b, 0.05);
        assert!(change <= 0.02, "seed {seed}: invariants moved by {change}");
    }
}

#[test]
fn rigid_motion_of_random_configurations() {
    let sim = Similarity { angle: 30f64.to_radians(), scale: 2.0, translation: pt(17.0, -5.0) };
    for seed in [1, 4] {
        let doc = common::random_document(seed);
        let region = common::region_of(&doc);
        let a = analyze(&doc.configuration, &region, &PipelineParams::default()).unwrap();
        let b = analyze(&doc.configuration.transformed(&sim), &region.transformed(&sim), &PipelineParams::default()).unwrap();
        let change = common::invariant_change(&a, &b, 0.05);
        assert!(change <= 0.01, "seed {seed}: invariants moved by {change}");
    }
}

fn symmetric_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(0.01f64..1.0, n * (n - 1) / 2).prop_map(move |upper| {
        let mut m = vec![vec![0.0; n]; n];
        let mut it = upper.into_iter();
        for i in 0..n {
            m[i][i] = 1.0;
            for j in i + 1..n {
                let x = it.next().unwrap();
                m[i][j] = x;
                m[j][i] = x;
            }
        }
        m
    })
}

fn matrix_and_weights() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (2usize..7).prop_flat_map(|n| (symmetric_matrix(n), prop::collection::vec(0.05f64..1.0, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chi_is_continuous_at_half(r in 0.0f64..10.0, extra in 0.0f64..10.0) {
        let ell = r + extra;
        prop_assert_eq!(chi(r, ell, 0.5).unwrap(), r);
        let below = chi(r, ell, 0.5 - 1e-12).unwrap();
        let above = chi(r, ell, 0.5 + 1e-12).unwrap();
        prop_assert!((below - above).abs() < 1e-9 * (1.0 + ell));
    }

    #[test]
    fn curvature_evolution_composes(k in -2.0f64..2.0, c1 in 0.0f64..0.4, c2 in 0.0f64..0.4) {
        prop_assume!((1.0 - (c1 + c2) * k).abs() > 0.1 && (1.0 - c1 * k).abs() > 0.1);
        let once = evolve_curvature(k, c1 + c2).unwrap();
        let twice = evolve_curvature(evolve_curvature(k, c1).unwrap(), c2).unwrap();
        prop_assert!((once - twice).abs() <= 1e-12 * once.abs().max(1.0));
    }

    #[test]
    fn perron_weights_and_conjugacy((m, v) in matrix_and_weights()) {
        let p = ProximityMatrix::from_entries(m, Variant::C).unwrap();
        let w = proximity_weights(&p).unwrap();
        prop_assert!(w.residual <= 1e-10);
        prop_assert!(w.eigenvalue >= 1.0);
        prop_assert!(w.weights.iter().all(|&x| x > 0.0));
        prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let wt = proximity_weights(&renormalize(&p, &v).unwrap()).unwrap();
        prop_assert!((wt.eigenvalue - w.eigenvalue).abs() <= 1e-10);
        let r = renormalized_weights(&w.weights, &v).unwrap();
        for (x, y) in r.iter().zip(&wt.weights) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn thresholds_are_monotone((m, s) in matrix_and_weights()) {
        let g = tiered_graph_from(&m, &s);
        let bad = common::threshold_monotonicity(&g);
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }

    #[test]
    fn absolute_significance_order_ignores_uniform_scale(s in prop::collection::vec(0.0f64..1.0, 2..7), k in 0.01f64..100.0, seed in 0u64..1000) {
        let v: Vec<f64> = (0..s.len()).map(|i| 0.1 + ((seed as usize * 7 + i * 13) % 17) as f64).collect();
        let order = |scale: f64| {
            let abs: Vec<f64> = s.iter().zip(&v).map(|(a, b)| a * b * scale).collect();
            let mut idx: Vec<usize> = (0..abs.len()).collect();
            idx.sort_by(|&a, &b| abs[b].total_cmp(&abs[a]).then(a.cmp(&b)));
            idx
        };
        prop_assert_eq!(order(1.0), order(k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn documents_round_trip_bit_exact(seed in 0u64..10_000) {
        let doc = common::random_document(seed);
        let back: ConfigDocument = parse_document(&serialize_document(&doc)).unwrap();
        for (a, b) in doc.configuration.objects.iter().zip(&back.configuration.objects) {
            for (p, q) in a.vertices().iter().zip(b.vertices()) {
                prop_assert_eq!(p.x.to_bits(), q.x.to_bits());
                prop_assert_eq!(p.y.to_bits(), q.y.to_bits());
            }
        }
        prop_assert_eq!(back, doc);
    }
}

