#![no_main]

use libfuzzer_sys::fuzz_target;
use villadsen_core::spaces::SpaceMap;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(map) = SpaceMap::from_json(text) {
        assert_eq!(map, SpaceMap::from_json(&map.to_json()).unwrap());
        let _ = map.normalize();
    }
});
