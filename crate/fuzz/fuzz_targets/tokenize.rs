//! Tokens produced by any tokenizer are never empty.
#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::{DelimiterSet, Tokenizer};

fuzz_target!(|raw: &str| {
    let delims = DelimiterSet::default();
    for tok in [Tokenizer::Pretokenized, Tokenizer::Whitespace, Tokenizer::Chars] {
        if let Ok(tokens) = tok.tokenize(raw, &delims) {
            assert!(tokens.iter().all(|t| !t.text.as_str().is_empty()));
        }
    }
});
