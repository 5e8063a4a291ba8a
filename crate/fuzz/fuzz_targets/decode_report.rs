#![no_main]

use hmsim::report::{decode_report, encode_report};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = decode_report(text) {
        let back = decode_report(&encode_report(&report)).expect("encoded report decodes");
        assert_eq!(back, report);
    }
});
