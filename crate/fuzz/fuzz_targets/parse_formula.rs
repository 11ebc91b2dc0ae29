#![no_main]

use libfuzzer_sys::fuzz_target;
use primal_core::syntax::{parse_formula, parse_formula_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = parse_formula(text) {
        // Printing is canonical: it reparses to the same tree.
        let printed = f.to_string();
        assert_eq!(parse_formula(&printed).as_ref(), Ok(&f), "{printed}");
    }
    let _ = parse_formula_list(text);
});
