#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_confidence::table::{join_scores, read_scores};
use structural_confidence::trajectory::Label;

fuzz_target!(|data: &[u8]| {
    if let Ok(scores) = read_scores(data) {
        let labels: Vec<(String, Label)> = scores
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.clone(), Label::from(i % 2 == 0)))
            .collect();
        let _ = join_scores(&scores, &labels);
    }
});
