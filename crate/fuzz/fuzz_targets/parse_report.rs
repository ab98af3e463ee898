#![no_main]

use libfuzzer_sys::fuzz_target;
use villadsen_core::report::Report;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = Report::from_json(text) {
        let json = r.to_json();
        assert_eq!(Report::from_json(&json).unwrap().to_json(), json);
    }
});
