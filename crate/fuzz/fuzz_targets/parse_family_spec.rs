#![no_main]
use libfuzzer_sys::fuzz_target;

use biortho::families::PairFamily;

fuzz_target!(|data: &str| {
    if let Ok(family) = data.parse::<PairFamily>() {
        let again: PairFamily = family.to_string().parse().unwrap();
        assert_eq!(family, again);
        // small dimensions keep each run cheap
        let _ = family.generate(3);
    }
});
