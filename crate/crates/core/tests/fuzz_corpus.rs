//! Replays the checked-in fuzz seeds through every decoder. Valid seeds must
//! round-trip; malformed seeds must fail without panicking.

use std::path::PathBuf;

use viewsynth::eval::{format_trajectory, parse_trajectory};
use viewsynth::model::{decode_checkpoint, encode_checkpoint};
use viewsynth::synth::{
    decode_pnm, decode_wf01, encode_pnm, encode_wf01, format_intrinsics, format_manifest, parse_intrinsics,
    parse_manifest,
};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

fn malformed(name: &str) -> bool {
    ["truncated", "bad_", "missing_"].iter().any(|p| name.starts_with(p))
}

#[test]
fn wf01_seeds() {
    for (name, data) in seeds("wf01") {
        match decode_wf01(&data) {
            Ok(img) => {
                assert!(!malformed(&name), "{name} decoded");
                assert_eq!(encode_wf01(&img), data, "{name}");
            }
            Err(_) => assert!(malformed(&name), "{name} failed"),
        }
    }
}

#[test]
fn pnm_seeds() {
    for (name, data) in seeds("pnm") {
        let img = decode_pnm(&data).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(decode_pnm(&encode_pnm(&img).unwrap()).unwrap(), img, "{name}");
    }
}

#[test]
fn text_seeds() {
    for (name, data) in seeds("intrinsics") {
        let text = String::from_utf8(data).unwrap();
        match parse_intrinsics(&text) {
            Ok(k) => assert_eq!(parse_intrinsics(&format_intrinsics(&k)).unwrap(), k),
            Err(_) => assert!(malformed(&name), "{name} failed"),
        }
    }
    for (name, data) in seeds("manifest") {
        let m = parse_manifest(&String::from_utf8(data).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_manifest(&format_manifest(&m)).unwrap(), m);
    }
    for (name, data) in seeds("trajectory") {
        let t = parse_trajectory(&String::from_utf8(data).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_trajectory(&format_trajectory(&t)).unwrap(), t);
    }
}

#[test]
fn checkpoint_seeds() {
    for (name, data) in seeds("checkpoint") {
        match decode_checkpoint(&data) {
            Ok(ck) => assert_eq!(encode_checkpoint(&ck), data, "{name}"),
            Err(_) => assert!(malformed(&name), "{name} failed"),
        }
    }
}
