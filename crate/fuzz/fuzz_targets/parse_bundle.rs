#![no_main]

use libfuzzer_sys::fuzz_target;
use villadsen_core::bundles::BundleExpr;
use villadsen_core::Budget;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(b) = BundleExpr::from_json(text) {
        assert_eq!(b, BundleExpr::from_json(&b.to_json()).unwrap());
        // Keep expansion small so one input cannot stall the run.
        let _ = b.chern_within(Budget::new(4096));
        let _ = b.euler_nonzero_structured();
    }
});
