#![no_main]

use hmsim::workload::{parse_trace, serialize_trace, validate_trace};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let capacity = 1 << 28;
    let (valid, errors) = validate_trace(text, capacity);
    match parse_trace(text, capacity) {
        Ok(records) => {
            assert!(errors.is_empty());
            assert_eq!(records.len(), valid);
            let again = parse_trace(&serialize_trace(&records), capacity).expect("serialized trace parses");
            assert_eq!(again, records);
        }
        Err(_) => assert!(!errors.is_empty()),
    }
});
