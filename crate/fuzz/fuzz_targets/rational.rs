#![no_main]

use libfuzzer_sys::fuzz_target;
use p1nf::rat::{format_rat, parse_rat};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_rat(src) {
        let shown = format_rat(&r);
        let back = parse_rat(&shown).expect("canonical form must reparse");
        assert_eq!(r, back);
    }
});
