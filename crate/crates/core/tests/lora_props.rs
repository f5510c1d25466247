// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::*;
use decor_core::format::default_header_path;
use decor_core::linalg::Matrix;
use decor_core::lora_attention::LoraAttentionWeights;
use decor_core::{
    decor_embedding, forward_decor, forward_standard, load_lora, random_lora, random_lora_in_span,
    save_lora, synthesize, DualPathConfig, Embedding64, LoraInit, SyntheticSpec,
};

fn weights(seed: u64) -> LoraAttentionWeights<f64> {
    random_lora(seed, 32, 32, 4, 0.7, LoraInit::Spherical).unwrap()
}

#[test]
fn low_rank_path_matches_dense_merge() {
    let w = weights(1);
    let mut r = rng(2);
    let x = gaussian(&mut r, 9, 32);
    let out = forward_standard(&x, &w).unwrap();
    let merged_k = w
        .w_k
        .add_scaled(w.scale, &w.a_k.matmul(&w.b_k).unwrap())
        .unwrap();
    let merged_v = w
        .w_v
        .add_scaled(w.scale, &w.a_v.matmul(&w.b_v).unwrap())
        .unwrap();
    assert!(
        out.keys
            .max_abs_diff(&x.matmul(&merged_k).unwrap())
            .unwrap()
            <= 1e-12
    );
    assert!(
        out.values
            .max_abs_diff(&x.matmul(&merged_v).unwrap())
            .unwrap()
            <= 1e-12
    );
}

#[test]
fn degenerate_dual_path_is_bitwise_standard() {
    let w = weights(3);
    let x = gaussian(&mut rng(4), 12, 32);
    let a = forward_decor(&x, &x, &w).unwrap();
    let b = forward_standard(&x, &w).unwrap();
    let bits = |m: &Matrix<f64>| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.keys), bits(&b.keys));
    assert_eq!(bits(&a.values), bits(&b.values));
}

#[test]
fn linear_in_projected_input_and_base_path_untouched() {
    let w = weights(5);
    let mut r = rng(6);
    let x = gaussian(&mut r, 6, 32);
    let p1 = gaussian(&mut r, 6, 32);
    let p2 = gaussian(&mut r, 6, 32);
    let (s, t) = (0.3, -1.7);
    let combo = p1.scale(s).add_scaled(t, &p2).unwrap();
    let base = x.matmul(&w.w_k).unwrap();
    let f = |xp: &Matrix<f64>| forward_decor(&x, xp, &w).unwrap().keys.sub(&base).unwrap();
    let lhs = f(&combo);
    let rhs = f(&p1).scale(s).add_scaled(t, &f(&p2)).unwrap();
    assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10);

    for xp in [&p1, &p2, &combo] {
        let out = forward_decor(&x, xp, &w).unwrap();
        let lora = w.lora_path(xp).unwrap();
        assert!(
            out.keys
                .sub(&lora.keys)
                .unwrap()
                .max_abs_diff(&base)
                .unwrap()
                <= 1e-12
        );
    }
}

fn fixture() -> (Embedding64, LoraAttentionWeights<f64>) {
    let e: Embedding64 = synthesize(&SyntheticSpec {
        l: 77,
        d: 128,
        n: 10,
        pad_coherence: 0.95,
        seed: 8,
    })
    .unwrap();
    let w = random_lora_in_span(9, &e.words(), 64, 4, 1.0).unwrap();
    (e, w)
}

fn word_lora_key_norm(
    e: &Embedding64,
    w: &LoraAttentionWeights<f64>,
    alpha: f64,
    resize: bool,
) -> f64 {
    let xp = decor_embedding(e, &DualPathConfig::new(alpha, resize).unwrap()).unwrap();
    let lora = w.lora_path(&xp).unwrap().keys;
    lora.slice_rows(0, e.n()).frobenius_norm()
}

#[test]
fn full_separation_silences_in_span_lora() {
    let (e, w) = fixture();
    for resize in [false, true] {
        let at0 = word_lora_key_norm(&e, &w, 0.0, resize);
        let at1 = word_lora_key_norm(&e, &w, 1.0, resize);
        assert!(at0 > 0.0);
        assert!(at1 <= 1e-8 * at0, "resize={resize}: {at1} vs {at0}");
    }
}

#[test]
fn lora_word_block_decreases_with_alpha() {
    let (e, w) = fixture();
    for resize in [false, true] {
        let norms: Vec<f64> = (0..=10)
            .map(|i| word_lora_key_norm(&e, &w, i as f64 / 10.0, resize))
            .collect();
        assert!(norms.windows(2).all(|p| p[1] <= p[0]), "{norms:?}");
    }
}

#[test]
fn lora_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let w = weights(10);
    let bin = dir.path().join("lora.bin");
    save_lora(&w, &bin, &default_header_path(&bin)).unwrap();
    let back: LoraAttentionWeights<f64> = load_lora(&bin, &default_header_path(&bin)).unwrap();
    assert_eq!(back.rank(), 4);
    assert_eq!(back.scale, 0.7);
    let x = gaussian(&mut rng(11), 5, 32);
    let a = forward_standard(&x, &w).unwrap();
    let b = forward_standard(&x, &back).unwrap();
    for (m, n) in [(&a.keys, &b.keys), (&a.values, &b.values)] {
        let rel = m.sub(n).unwrap().frobenius_norm() / m.frobenius_norm();
        assert!(rel <= 1e-6, "{rel}");
    }
}

#[test]
fn zero_init_b_keeps_base_path() {
    let w = random_lora::<f64>(12, 16, 8, 2, 1.0, LoraInit::ZeroB).unwrap();
    let x = gaussian(&mut rng(13), 4, 16);
    assert_eq!(forward_standard(&x, &w).unwrap(), w.base_path(&x).unwrap());
}

#[test]
fn f32_forward_tracks_f64() {
    let w = weights(14);
    let x = gaussian(&mut rng(15), 4, 32);
    let w32 = LoraAttentionWeights::new(
        w.w_k.cast(),
        w.w_v.cast(),
        (w.a_k.cast(), w.b_k.cast()),
        (w.a_v.cast(), w.b_v.cast()),
        w.scale as f32,
    )
    .unwrap();
    let a = forward_standard(&x, &w).unwrap().keys;
    let b: Matrix<f64> = forward_standard(&x.cast::<f32>(), &w32)
        .unwrap()
        .keys
        .cast();
    let rel = a.sub(&b).unwrap().frobenius_norm() / a.frobenius_norm();
    assert!(rel < 1e-5, "{rel}");
}
