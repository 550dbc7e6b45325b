#![no_main]

use libfuzzer_sys::fuzz_target;
use viewsynth::synth::{decode_pnm, encode_pnm};

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = decode_pnm(data) {
        assert!(img.data().iter().all(|x| (0.0..=1.0).contains(x)));
        let bytes = encode_pnm(&img).expect("decoded channels are 1 or 3");
        decode_pnm(&bytes).expect("re-encoded image must decode");
    }
});
