#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_confidence::trajectory::format::read_with_header;
use structural_confidence::trajectory::write_trajectories;

fuzz_target!(|data: &[u8]| {
    // A non-empty file the reader accepts re-encodes to the same bytes.
    // Empty files may carry dimensions the writer cannot infer.
    if let Ok((header, records)) = read_with_header(data) {
        let mut out = Vec::new();
        if !records.is_empty() && write_trajectories(&records, &mut out, header.flags).is_ok() {
            assert_eq!(out, data);
        }
    }
});
