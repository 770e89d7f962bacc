//! Splits the input at the first NUL into a source and a target buffer.
#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::corpus::{parse_parallel, Lang, LineMode};

fuzz_target!(|data: &[u8]| {
    let cut = data.iter().position(|&b| b == 0).unwrap_or(data.len());
    let (src, tgt) = (&data[..cut], data.get(cut + 1..).unwrap_or(&[]));
    for mode in [LineMode::Pretokenized, LineMode::Raw] {
        if let Ok(corpus) = parse_parallel(src, tgt, &Lang::new("src"), &Lang::new("tgt"), mode) {
            assert!(corpus.pairs.iter().enumerate().all(|(i, p)| p.id == i));
        }
    }
});
