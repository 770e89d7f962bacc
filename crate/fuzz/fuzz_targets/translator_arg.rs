#![no_main]

use libfuzzer_sys::fuzz_target;
use segaug::backtranslate::TranslatorArg;

fuzz_target!(|arg: &str| {
    let _ = arg.parse::<TranslatorArg>();
});
