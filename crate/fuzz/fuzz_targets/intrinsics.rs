#![no_main]

use libfuzzer_sys::fuzz_target;
use viewsynth::synth::{format_intrinsics, parse_intrinsics};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(k) = parse_intrinsics(text) {
        assert_eq!(parse_intrinsics(&format_intrinsics(&k)).unwrap(), k);
    }
});
