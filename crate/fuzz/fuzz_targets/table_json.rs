#![no_main]

use libfuzzer_sys::fuzz_target;
use maxstab::json::{parse_table, parse_table_or_model, table_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = parse_table(text) {
        let back = parse_table(&table_to_json(&table).to_string()).expect("serialized table reparses");
        assert_eq!(back, table);
    }
    let _ = parse_table_or_model(text);
});
