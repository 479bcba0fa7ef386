#![no_main]

use libfuzzer_sys::fuzz_target;
use structural_confidence::table::FeatureTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = FeatureTable::read_csv(data) {
        assert_eq!(table.values.rows(), table.len());
        assert_eq!(table.values.cols(), table.columns.len());
        let mut out = Vec::new();
        table.write_csv(&mut out).unwrap();
        let back = FeatureTable::read_csv(&out[..]).unwrap();
        assert_eq!(back.ids, table.ids);
        assert_eq!(back.labels, table.labels);
    }
});
