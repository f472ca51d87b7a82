#![no_main]

use libfuzzer_sys::fuzz_target;
use maxstab::SubsetMask;

fuzz_target!(|data: &[u8]| {
    let Some((&d, rest)) = data.split_first() else {
        return;
    };
    let Ok(key) = std::str::from_utf8(rest) else {
        return;
    };
    let d = usize::from(d % 20);
    if let Ok(mask) = SubsetMask::parse_key(key, d) {
        assert_eq!(SubsetMask::parse_key(&mask.to_key(), d), Ok(mask));
    }
});
