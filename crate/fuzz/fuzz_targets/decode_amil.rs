#![no_main]

use hmsim::dram_cache::{amil_column, decode_amil_column};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(meta) = decode_amil_column(data) {
        assert_eq!(&amil_column(&meta)[..], data);
    }
});
