#![no_main]

use libfuzzer_sys::fuzz_target;
use villadsen_core::cohomology::ClassDocument;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = ClassDocument::from_json(text) else { return };
    if let Ok(class) = doc.to_class() {
        let again = ClassDocument::from_json(&doc.to_json()).unwrap().to_class().unwrap();
        assert_eq!(class, again);
        let _ = class.components_by_degree();
    }
});
