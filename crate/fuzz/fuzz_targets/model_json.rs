#![no_main]

use libfuzzer_sys::fuzz_target;
use maxstab::json::{model_to_json, parse_model};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = parse_model(text) {
        // Anything accepted must serialize to a document that is accepted again.
        let doc = model_to_json(&model).to_string();
        let back = parse_model(&doc).expect("serialized model reparses");
        assert_eq!(back.dim(), model.dim());
        assert_eq!(back.family(), model.family());
    }
});
