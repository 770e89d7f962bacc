#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::pipeline::FileConfig;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = FileConfig::parse(text) {
        let _ = cfg.delimiter_set();
        let _ = cfg.rate_denominator();
        let _ = cfg.timeout();
    }
});
