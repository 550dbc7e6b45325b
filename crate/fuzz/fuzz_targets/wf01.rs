#![no_main]

use libfuzzer_sys::fuzz_target;
use viewsynth::synth::{decode_wf01, encode_wf01};

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = decode_wf01(data) {
        let again = decode_wf01(&encode_wf01(&img)).expect("re-encoded image must decode");
        assert_eq!(again, img);
    }
});
