#![no_main]

use libfuzzer_sys::fuzz_target;
use villadsen_core::spaces::SpaceDescriptor;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(space) = SpaceDescriptor::from_json(text) {
        let again = SpaceDescriptor::from_json(&space.to_json()).unwrap();
        assert_eq!(space, again);
    }
});
