use levichk_core::levi::{check_main_theorem, LeviData, LeviVerdict};
use levichk_core::{ProblemFile, ProblemSpec};
use proptest::prelude::*;

fn second_order(a: &str, c01: &str, c10: &str) -> ProblemSpec {
    let text = format!(
        r#"{{"order": 2, "dim": 1, "horizon": 1.0, "roots": [["{a}"], ["-({a})"]],
            "lower_order": [{{"dt": 0, "dx": [1], "coeff": "{c01}"}}, {{"dt": 1, "dx": [0], "coeff": "{c10}"}}],
            "data": ["0", "0"]}}"#
    );
    ProblemFile::from_json(&text).unwrap().into_spec().unwrap()
}

// (a, d_t a)
const PROFILES: [(&str, &str); 4] = [("t", "1"), ("t^2", "2*t"), ("1 + t", "1"), ("t^3 + t", "3*t^2 + 1")];
const A10: [&str; 4] = ["0", "1", "cos(x1)", "t"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// With `c = -i a` for the lower coefficients, the single condition holds exactly when
    /// `a01 + a a10 - d_t a` vanishes.
    #[test]
    fn second_order_verdict_tracks_identity(p in 0..PROFILES.len(), q in 0..A10.len(), broken in any::<bool>()) {
        let (a, da) = PROFILES[p];
        let a10 = A10[q];
        let a01 = format!("({da}) - ({a})*({a10})");
        let a01 = if broken { format!("{a01} + 0.1") } else { a01 };
        let spec = second_order(a, &format!("-i*({a01})"), &format!("-i*({a10})"));
        let report = check_main_theorem(&spec);
        let want = if broken { LeviVerdict::Fail } else { LeviVerdict::Pass };
        prop_assert_eq!(report.overall, want, "{:?}", report);
    }
}

#[test]
fn d_is_supported_on_the_last_row() {
    let text = r#"{"order": 4, "dim": 2, "horizon": 1.0,
        "roots": [["1", "0"], ["t", "1"], ["-t", "0"], ["0", "t^2"]],
        "lower_order": [{"dt": 3, "dx": [0, 0], "coeff": "t"}, {"dt": 1, "dx": [1, 1], "coeff": "cos(x1)"},
                        {"dt": 0, "dx": [0, 2], "coeff": "2"}],
        "data": ["0", "0", "0", "0"]}"#;
    let spec = ProblemFile::from_json(text).unwrap().into_spec().unwrap();
    let data = LeviData::new(&spec).unwrap();
    for i in 0..3 {
        assert!(data.d.rows().nth(i).unwrap().iter().all(|s| s.is_zero()));
    }
    assert!(data.d.rows().nth(3).unwrap().iter().any(|s| !s.is_zero()));
}
