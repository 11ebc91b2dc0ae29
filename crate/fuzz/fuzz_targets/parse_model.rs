#![no_main]

use libfuzzer_sys::fuzz_target;
use primal_core::semantics::{check_kripke_model, check_qb_valuation, parse_model, ModelFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(m) = parse_model(text) else {
        return;
    };
    // The checker must report, never panic.
    match &m {
        ModelFile::QuasiBoolean(q) => {
            let _ = check_qb_valuation(q);
        }
        ModelFile::Kripke(k) => {
            let _ = check_kripke_model(k);
        }
    }
    let printed = m.to_string();
    assert_eq!(parse_model(&printed).ok().as_ref(), Some(&m), "{printed}");
});
