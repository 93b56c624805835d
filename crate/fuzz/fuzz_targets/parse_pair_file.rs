#![no_main]
use libfuzzer_sys::fuzz_target;

use biortho::io::{pair_to_json, parse_pair};

fuzz_target!(|data: &[u8]| {
    if let Ok(pair) = parse_pair(data) {
        // anything accepted must survive a save/load cycle unchanged
        let again = parse_pair(pair_to_json(&pair).as_bytes()).unwrap();
        assert_eq!(pair, again);
    }
});
