#![no_main]

use libfuzzer_sys::fuzz_target;
use p1nf::normal_form::Forcing;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(f) = Forcing::parse(src) {
        let shown = f.to_string();
        let back = Forcing::parse(&shown).expect("display output must reparse");
        assert_eq!(f, back);
    }
});
