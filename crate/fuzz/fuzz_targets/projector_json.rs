#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_confidence::estimator::PcaProjector;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = PcaProjector::from_json(text) {
        let z = p.project(&vec![1.0; p.n_features()]).unwrap();
        assert_eq!(z.len(), p.k);
        assert_eq!(p.reconstruct(&z).unwrap().len(), p.n_features());
    }
});
