#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::backtranslate::parse_dictionary;

fuzz_target!(|text: &str| {
    let _ = parse_dictionary(text);
});
