use ira_concat::ira::{AceParams, IraCode};
use ira_concat::stopping::{detect_all, is_stopping_set, sensitivity_histogram};

#[test]
fn detector_outputs_verify_on_the_181_128_code() {
    let code = IraCode::construct(128, 181, 10, AceParams::default(), 1).unwrap();
    let g = code.h().tanner();
    let sets = detect_all(g);
    assert_eq!(sets.len(), 181);
    for s in &sets {
        assert!(s.contains(s.origin));
        assert!(is_stopping_set(g, &s.members).unwrap(), "start {}", s.origin);
    }
    let hist = sensitivity_histogram(g);
    assert_eq!(hist.counts.len(), 181);
    assert!(hist.max_count() <= 181);
    // Every run contributes its start node at least.
    assert!(hist.counts.iter().all(|&c| c >= 1));
}
