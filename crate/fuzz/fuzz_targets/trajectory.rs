#![no_main]

use libfuzzer_sys::fuzz_target;
use viewsynth::eval::{format_trajectory, parse_trajectory};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(traj) = parse_trajectory(text) {
        let again = parse_trajectory(&format_trajectory(&traj)).expect("emitted trajectory must parse");
        assert_eq!(again, traj);
    }
});
