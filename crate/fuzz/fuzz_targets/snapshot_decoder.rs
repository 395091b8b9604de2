#![no_main]

use fnls_core::lattice::{decode_snapshot, encode_snapshot};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(snap) = decode_snapshot(data) {
        // the encoding is canonical
        assert_eq!(encode_snapshot(&snap.field, snap.t), data);
    }
});
