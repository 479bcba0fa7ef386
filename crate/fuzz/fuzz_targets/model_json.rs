#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_confidence::estimator::ConfidenceModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = ConfidenceModel::from_json(text) {
        if model.n_features > 1 << 16 {
            return;
        }
        // A validated model scores any input of the right width without looping.
        let x = vec![0.5; model.n_features];
        let p = model.predict(&x).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert_eq!(ConfidenceModel::from_json(&model.to_json()).unwrap(), model);
    }
});
