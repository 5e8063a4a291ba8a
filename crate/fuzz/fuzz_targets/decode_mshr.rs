#![no_main]

use hmsim::dram_cache::MshrEntry;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut word = [0u8; 8];
    let n = data.len().min(8);
    word[..n].copy_from_slice(&data[..n]);
    let word = u64::from_le_bytes(word);
    match MshrEntry::decode(word) {
        Ok(entry) => assert_eq!(entry.encode(), word),
        Err(_) => assert!(word >> 51 != 0),
    }
});
