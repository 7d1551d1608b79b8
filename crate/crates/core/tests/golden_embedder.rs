//! The reference embedder is pinned by a golden-vector file produced by an
//! independent hand-written FNV-1a script (`golden/gen_hashbow_golden.py`).
//! Any drift in hashing, bucketing, sign rule or normalization fails here.

use serde::Deserialize;

use ragforge::embedding::reference_embed;

#[derive(Deserialize)]
struct Golden {
    text: String,
    dimension: usize,
    embedder_id: String,
    values: Vec<f64>,
}

fn load_golden() -> Golden {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/golden/hashbow_golden.json"
    );
    serde_json::from_str(&std::fs::read_to_string(path).expect("golden file")).expect("golden JSON")
}

#[test]
fn golden_vector_matches_elementwise() {
    let golden = load_golden();
    let got = reference_embed(&golden.text, golden.dimension);
    assert_eq!(got.embedder_id, golden.embedder_id);
    assert_eq!(got.values.len(), golden.values.len());
    for (i, (got_v, want_v)) in got.values.iter().zip(&golden.values).enumerate() {
        assert!(
            (got_v - want_v).abs() <= 1e-12,
            "element {i}: got {got_v}, want {want_v}"
        );
    }
}

#[test]
fn golden_vector_is_unit_norm() {
    let golden = load_golden();
    let norm: f64 = golden.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-9);
}
