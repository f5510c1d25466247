// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::*;
use decor_core::linalg::Matrix;
use decor_core::{
    component_groups, norm_match, reconstruct, similarity_profile, spectrum, synthesize, thin_svd,
    ComponentSelection, Embedding64, SyntheticSpec,
};
use proptest::prelude::*;

fn synthetic(c: f64, seed: u64) -> Embedding64 {
    synthesize(&SyntheticSpec {
        l: 77,
        d: 768,
        n: 10,
        pad_coherence: c,
        seed,
    })
    .unwrap()
}

#[test]
fn primary_component_reconstructs_pads() {
    for seed in 0..20 {
        let e = synthetic(0.95, seed);
        let f = thin_svd(e.x()).unwrap();
        let g = component_groups(&f, e.l());
        let p = similarity_profile(&e, &reconstruct(&f, &g.primary).unwrap()).unwrap();
        assert!(
            p.pad_mean >= 0.9 && p.word_mean <= 0.5,
            "seed {seed}: {p:?}"
        );
    }
}

#[test]
fn residual_components_reconstruct_little() {
    for seed in 0..20 {
        let e = synthetic(0.95, seed);
        let f = thin_svd(e.x()).unwrap();
        let g = component_groups(&f, e.l());
        let p = similarity_profile(&e, &reconstruct(&f, &g.residual).unwrap()).unwrap();
        assert!(p.word_mean <= 0.5 && p.pad_mean <= 0.5, "seed {seed}");
    }
}

#[test]
fn group_ordering_matches_token_roles() {
    for seed in 0..20 {
        let e = synthetic(0.95, seed);
        let f = thin_svd(e.x()).unwrap();
        let g = component_groups(&f, e.l());
        let prim = similarity_profile(&e, &reconstruct(&f, &g.primary).unwrap()).unwrap();
        let sub = similarity_profile(&e, &reconstruct(&f, &g.subsequent).unwrap()).unwrap();
        assert!(prim.pad_mean > sub.pad_mean, "seed {seed}");
        assert!(sub.word_mean > prim.word_mean, "seed {seed}");
    }
}

#[test]
fn synthetic_spectra_dominance() {
    let mean = |c: f64| {
        (0..20)
            .map(|s| spectrum(&synthetic(c, s), 30).unwrap().dominance_ratio)
            .sum::<f64>()
            / 20.0
    };
    assert!(mean(0.95) >= 3.0);
    assert!(mean(0.0) <= 1.5);
}

#[test]
fn norm_matched_primary_has_input_norm() {
    let mut r = rng(21);
    let m = gaussian(&mut r, 77, 768);
    let f = thin_svd(&m).unwrap();
    let prim = reconstruct(&f, &[0].into_iter().collect()).unwrap();
    let out = norm_match(&prim, &m).unwrap();
    let (a, b) = (out.frobenius_norm(), m.frobenius_norm());
    assert!((a - b).abs() <= 1e-12 * b);
}

#[test]
fn spectrum_reports_requested_count() {
    let s = spectrum(&synthetic(0.95, 0), 30).unwrap();
    assert_eq!(s.sigmas.len(), 30);
    assert_eq!(s.normalized[0], 1.0);
    assert!(s.dominance_ratio >= 1.0);
}

fn factored() -> impl Strategy<Value = (Matrix<f64>, Vec<bool>)> {
    (2usize..=10, 2usize..=14, any::<u64>()).prop_flat_map(|(r, c, seed)| {
        let k = r.min(c);
        proptest::collection::vec(any::<bool>(), k).prop_map(move |mask| {
            let mut g = rng(seed);
            (gaussian(&mut g, r, c), mask)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn additivity_and_energy((m, mask) in factored()) {
        let f = thin_svd(&m).unwrap();
        let a: ComponentSelection = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        let b = a.complement(f.k());
        let ra = reconstruct(&f, &a).unwrap();
        let rb = reconstruct(&f, &b).unwrap();
        let rab = reconstruct(&f, &a.union(&b)).unwrap();
        prop_assert!(rab.sub(&ra.add(&rb).unwrap()).unwrap().max_abs() <= 1e-12 * m.max_abs().max(1.0));

        let energy: f64 = a.indices().map(|i| f.sigma[i] * f.sigma[i]).sum();
        let got = ra.frobenius_norm().powi(2);
        prop_assert!((got - energy).abs() <= 1e-10 * energy.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn components_are_frobenius_orthogonal((m, _) in factored()) {
        let f = thin_svd(&m).unwrap();
        let scale = f.sigma[0] * f.sigma[0];
        for i in 0..f.k() {
            for j in (i + 1)..f.k() {
                let ip = f.component(i).frobenius_inner(&f.component(j)).unwrap();
                prop_assert!(ip.abs() <= 1e-10 * scale.max(1.0));
            }
        }
    }
}
