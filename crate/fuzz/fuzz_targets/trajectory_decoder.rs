#![no_main]

use fnls_core::lattice::{decode_trajectory, encode_snapshot};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(snaps) = decode_trajectory(data) {
        let bytes: Vec<u8> = snaps.iter().flat_map(|s| encode_snapshot(&s.field, s.t)).collect();
        assert_eq!(bytes, data);
        assert!(snaps.windows(2).all(|w| w[0].t < w[1].t));
    }
});
