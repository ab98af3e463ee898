#![no_main]

use libfuzzer_sys::fuzz_target;
use villadsen_core::v2_type2::KParam;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(k) = text.parse::<KParam>() {
        assert_eq!(k.to_string().parse::<KParam>().unwrap(), k);
    }
});
