#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::align::parse_translation_table;

fuzz_target!(|text: &str| {
    let _ = parse_translation_table(text);
});
