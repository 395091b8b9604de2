#![no_main]

use fnls_cli::{parse_config_str, Experiment};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // errors are fine, panics are not
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_config_str(text) {
        for exp in Experiment::ALL {
            let _ = cfg.check_applicable(exp);
        }
        // accepted parameters always satisfy the validator
        assert!(cfg.params.validate().is_ok());
    }
});
