#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_confidence::config::parse_key_values;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(map) = parse_key_values(text) {
        for key in map.keys() {
            assert!(!key.is_empty());
            assert!(key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
        }
    }
});
