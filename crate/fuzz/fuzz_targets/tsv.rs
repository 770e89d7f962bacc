#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::corpus::{parse_tsv, Lang, LineMode};

fuzz_target!(|data: &[u8]| {
    for mode in [LineMode::Pretokenized, LineMode::Raw] {
        let _ = parse_tsv(data, &Lang::new("src"), &Lang::new("tgt"), mode);
    }
});
