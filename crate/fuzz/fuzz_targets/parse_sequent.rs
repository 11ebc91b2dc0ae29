#![no_main]

use libfuzzer_sys::fuzz_target;
use primal_core::syntax::parse_sequent;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = parse_sequent(text) {
        let printed = s.to_string();
        assert_eq!(parse_sequent(&printed).as_ref(), Ok(&s), "{printed}");
    }
});
