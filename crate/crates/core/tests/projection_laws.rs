// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::*;
use decor_core::linalg::Matrix;
use decor_core::{
    build_projector, decor_embedding, project_separate, remove_target, suppress_exclude_components,
    synthesize, DualPathConfig, Embedding64, ProjectionMethod, SyntheticSpec,
};
use decor_core::{component_groups, reconstruct, similarity_profile, thin_svd};
use proptest::prelude::*;

const ALPHAS: [f64; 5] = [0.0, 0.25, 0.5, 0.8, 1.0];

#[test]
fn full_separation_is_orthogonal_to_subspace() {
    let mut r = rng(11);
    let x = gaussian(&mut r, 77, 768);
    let xt = gaussian(&mut r, 6, 768);
    let p = build_projector(&xt, ProjectionMethod::Svd).unwrap();
    let out = project_separate(&x, &p, 1.0).unwrap();
    let res = p.apply(&out).unwrap().frobenius_norm();
    assert!(res <= 1e-8 * x.frobenius_norm(), "{res}");
}

#[test]
fn svd_and_gram_schmidt_projectors_agree() {
    let mut r = rng(12);
    let xt = gaussian(&mut r, 6, 768);
    let a = build_projector(&xt, ProjectionMethod::Svd).unwrap();
    let b = build_projector(&xt, ProjectionMethod::GramSchmidt).unwrap();
    assert_eq!(a.rank, 6);
    assert_eq!(b.rank, 6);
    assert!(a.p.sub(&b.p).unwrap().frobenius_norm() <= 1e-8);
}

#[test]
fn separation_is_linear_in_alpha() {
    let mut r = rng(13);
    let x = gaussian(&mut r, 20, 48);
    let p = build_projector(&gaussian(&mut r, 4, 48), ProjectionMethod::Svd).unwrap();
    let xp = p.apply(&x).unwrap();
    for alpha in ALPHAS {
        let out = project_separate(&x, &p, alpha).unwrap();
        let lhs = p.apply(&out).unwrap();
        let rhs = xp.scale(1.0 - alpha);
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-10, "alpha={alpha}");
        // X'(α) = (1 - α) X P + X (I - P)
        let split = rhs.add(&x.sub(&xp).unwrap()).unwrap();
        assert!(out.sub(&split).unwrap().max_abs() <= 1e-10);
    }
}

#[test]
fn full_separation_is_idempotent_and_complementary() {
    let mut r = rng(14);
    let x = gaussian(&mut r, 10, 32);
    let p = build_projector(&gaussian(&mut r, 3, 32), ProjectionMethod::Svd).unwrap();
    let once = project_separate(&x, &p, 1.0).unwrap();
    let twice = project_separate(&once, &p, 1.0).unwrap();
    assert!(twice.sub(&once).unwrap().max_abs() <= 1e-10);
    let back = once.add(&p.apply(&x).unwrap()).unwrap();
    assert!(back.sub(&x).unwrap().max_abs() <= 1e-12);
}

#[test]
fn norm_is_non_increasing_in_alpha() {
    let mut r = rng(15);
    let x = gaussian(&mut r, 12, 40);
    let p = build_projector(&gaussian(&mut r, 5, 40), ProjectionMethod::Svd).unwrap();
    let norms: Vec<f64> = (0..=20)
        .map(|i| {
            project_separate(&x, &p, i as f64 / 20.0)
                .unwrap()
                .frobenius_norm()
        })
        .collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{norms:?}");
}

#[test]
fn methods_give_equal_outputs() {
    let mut r = rng(16);
    let x = gaussian(&mut r, 30, 96);
    let xt = gaussian(&mut r, 8, 96);
    let a = build_projector(&xt, ProjectionMethod::Svd).unwrap();
    let b = build_projector(&xt, ProjectionMethod::GramSchmidt).unwrap();
    for alpha in ALPHAS {
        let oa = project_separate(&x, &a, alpha).unwrap();
        let ob = project_separate(&x, &b, alpha).unwrap();
        assert!(oa.sub(&ob).unwrap().frobenius_norm() <= 1e-7);
    }
}

fn synthetic(seed: u64) -> Embedding64 {
    synthesize(&SyntheticSpec {
        l: 77,
        d: 768,
        n: 10,
        pad_coherence: 0.95,
        seed,
    })
    .unwrap()
}

#[test]
fn decor_embedding_contracts() {
    let e = synthetic(1);
    let id = decor_embedding(&e, &DualPathConfig::new(0.0, false).unwrap()).unwrap();
    assert_eq!(&id, e.x());

    let full = decor_embedding(&e, &DualPathConfig::new(1.0, false).unwrap()).unwrap();
    let p = build_projector(&e.words(), ProjectionMethod::Svd).unwrap();
    let proj = p.apply(&full).unwrap();
    for i in 0..e.n() {
        let rn = decor_core::linalg::norm(full.row(i));
        let pn = decor_core::linalg::norm(proj.row(i));
        assert!(
            pn <= 1e-8 * rn.max(decor_core::linalg::norm(e.x().row(i))),
            "row {i}: {pn}"
        );
    }

    let resized = decor_embedding(&e, &DualPathConfig::new(0.8, true).unwrap()).unwrap();
    let (a, b) = (resized.frobenius_norm(), e.x().frobenius_norm());
    assert!((a - b).abs() <= 1e-12 * b);
}

#[test]
fn self_removal_leaves_nothing() {
    let mut r = rng(17);
    let x = gaussian(&mut r, 7, 50);
    let out = remove_target(&x, &x, 1.0).unwrap();
    assert!(out.frobenius_norm() <= 1e-8 * x.frobenius_norm());
}

#[test]
fn excluding_subsequent_components_drops_word_similarity() {
    for seed in 0..20 {
        let e = synthetic(seed);
        let before = similarity_profile(&e, e.x()).unwrap();
        let out = suppress_exclude_components(&e, 2, 9).unwrap();
        let after = similarity_profile(&e, &out).unwrap();
        assert!(after.word_mean < before.word_mean - 0.1, "seed {seed}");
        assert!(after.pad_mean >= 0.9, "seed {seed}");
    }
}

#[test]
fn exclusion_matches_complement_reconstruction() {
    let e = synthetic(2);
    let f = thin_svd(e.x()).unwrap();
    let g = component_groups(&f, e.l());
    let kept = g.subsequent.complement(f.k());
    let expected = reconstruct(&f, &kept).unwrap();
    let out = suppress_exclude_components(&e, 2, 9).unwrap();
    assert!(out.sub(&expected).unwrap().max_abs() <= 1e-12);
}

fn source_matrix() -> impl Strategy<Value = Matrix<f64>> {
    (1usize..=10, 2usize..=64, any::<u64>()).prop_map(|(rows, d, seed)| {
        let mut r = rng(seed);
        gaussian(&mut r, rows, d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projector_laws(xt in source_matrix()) {
        for method in [ProjectionMethod::Svd, ProjectionMethod::GramSchmidt] {
            let p = build_projector(&xt, method).unwrap();
            let norm = p.p.frobenius_norm();
            prop_assert!(p.p.sub(&p.p.transpose()).unwrap().frobenius_norm() <= 1e-10 * norm);
            let pp = p.p.matmul(&p.p).unwrap();
            prop_assert!(pp.sub(&p.p).unwrap().frobenius_norm() <= 1e-8 * norm);
            prop_assert!((p.p.trace() - p.rank as f64).abs() <= 1e-6);
            prop_assert_eq!(p.rank, xt.rows().min(xt.cols()));
        }
    }
}
