#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::DelimiterSet;

fuzz_target!(|spec: &str| {
    let _ = DelimiterSet::parse_list(spec);
});
