#![no_main]

use libfuzzer_sys::fuzz_target;
use p1nf::io::SeriesFile;

fuzz_target!(|data: &[u8]| {
    let Ok(file) = serde_json::from_slice::<SeriesFile>(data) else { return };
    if let Ok(nf) = file.into_series() {
        // Anything that loads must survive a save/load round trip.
        let again = SeriesFile::from_series(&nf);
        let text = serde_json::to_string(&again).unwrap();
        let back: SeriesFile = serde_json::from_str(&text).unwrap();
        back.into_series().expect("round-tripped file must load");
    }
});
