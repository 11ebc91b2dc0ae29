#![no_main]

use libfuzzer_sys::fuzz_target;
use primal_core::calculus::{check_derivation, derivation_from_json, derivation_to_json};
use primal_core::syntax::CalculusId;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(d) = derivation_from_json(text) else {
        return;
    };
    for calc in CalculusId::ALL {
        let _ = check_derivation(&d, calc, true);
    }
    let json = derivation_to_json(&d);
    assert_eq!(derivation_from_json(&json).ok().as_ref(), Some(&d));
});
