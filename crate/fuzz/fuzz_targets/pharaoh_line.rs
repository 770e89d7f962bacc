//! Parses one alignment line; accepted lines must survive a format round trip.
#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::{format_pharaoh, parse_pharaoh};

fuzz_target!(|line: &str| {
    if let Ok(wa) = parse_pharaoh(line) {
        let canonical = format_pharaoh(&wa);
        assert_eq!(parse_pharaoh(&canonical).ok(), Some(wa));
    }
});
