#![no_main]

use libfuzzer_sys::fuzz_target;
use viewsynth::synth::{format_manifest, parse_manifest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_manifest(text) {
        // paths with surrounding whitespace or newlines do not survive the
        // line format, so only check the structure
        let again = parse_manifest(&format_manifest(&m));
        if let Ok(again) = again {
            assert_eq!(again.target, m.target);
            assert_eq!(again.frames.len(), m.frames.len());
        }
    }
});
