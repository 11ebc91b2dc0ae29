#![no_main]

use libfuzzer_sys::fuzz_target;
use primal_core::harness::parse_corpus;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_corpus(text);
    }
});
