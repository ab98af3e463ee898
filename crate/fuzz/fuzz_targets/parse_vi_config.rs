#![no_main]

use libfuzzer_sys::fuzz_target;
use villadsen_core::vi_type1::VISystem;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sys) = VISystem::from_json(text) {
        assert_eq!(sys, VISystem::from_json(&sys.to_json()).unwrap());
    }
});
