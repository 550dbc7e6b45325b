#![no_main]

use libfuzzer_sys::fuzz_target;
use viewsynth::model::{decode_checkpoint, encode_checkpoint};

fuzz_target!(|data: &[u8]| {
    if let Ok(ck) = decode_checkpoint(data) {
        assert_eq!(encode_checkpoint(&ck), data);
    }
});
