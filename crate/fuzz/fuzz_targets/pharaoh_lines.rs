#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::align::parse_pharaoh_lines;

fuzz_target!(|data: &[u8]| {
    let _ = parse_pharaoh_lines(data);
});
