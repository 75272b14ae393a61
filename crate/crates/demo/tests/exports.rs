use serde_json::Value;
use termalign_demo::{hubness_json, procrustes_2d_json, rotation_recovery_json};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn plane_fit_recovers_angle_without_noise() {
    for angle in [-170.0, -35.0, 0.0, 20.0, 90.0, 179.0] {
        let r = parse(procrustes_2d_json(30, angle, 0.0, false, 4).unwrap());
        assert!((r["angle"].as_f64().unwrap() - angle).abs() < 1e-9, "{angle}");
        assert_eq!(r["reflection"], false);
        assert!(r["residual"].as_f64().unwrap() < 1e-9);
        let (m, t) = (r["mapped"].as_array().unwrap(), r["target"].as_array().unwrap());
        for (a, b) in m.iter().zip(t) {
            for i in 0..2 {
                assert!((a[i].as_f64().unwrap() - b[i].as_f64().unwrap()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn plane_fit_detects_reflection() {
    let r = parse(procrustes_2d_json(30, 40.0, 0.0, true, 4).unwrap());
    assert_eq!(r["reflection"], true);
    assert!(r["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn plane_fit_rejects_bad_input() {
    assert!(procrustes_2d_json(1, 0.0, 0.0, false, 0).is_err());
    assert!(procrustes_2d_json(10, 0.0, -1.0, false, 0).is_err());
}

#[test]
fn recovery_is_exact_without_noise() {
    let r = parse(rotation_recovery_json(300, 10, 0.0, 0.2, 5, 2).unwrap());
    assert_eq!(r["p_at_1"], 1.0);
    assert!(r["distance_to_truth"].as_f64().unwrap() < 1e-6);
    assert!(r["orthogonality_error"].as_f64().unwrap() < 1e-6);
    assert!(rotation_recovery_json(10_000, 10, 0.0, 0.2, 5, 2).is_err());
}

#[test]
fn csls_flattens_hubs() {
    let r = parse(hubness_json(500, 20, 10, 3).unwrap());
    let cos_never = r["cosine_never_retrieved"].as_u64().unwrap();
    let csls_never = r["csls_never_retrieved"].as_u64().unwrap();
    assert!(csls_never <= cos_never, "{r}");
    assert!(r["csls_max"].as_u64().unwrap() <= r["cosine_max"].as_u64().unwrap());
    let total: u64 = r["cosine_histogram"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 500);
}
