//! The first byte picks the expected number of translations.
#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::backtranslate::decode_http_response;

fuzz_target!(|data: &[u8]| {
    let Some((&n, body)) = data.split_first() else { return };
    let Ok(body) = std::str::from_utf8(body) else { return };
    let expected = usize::from(n % 16);
    if let Ok(out) = decode_http_response(body, expected, 0..expected) {
        assert_eq!(out.len(), expected);
    }
});
