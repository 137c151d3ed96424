#![no_main]

use libfuzzer_sys::fuzz_target;
use rgis::cover::{parse_cover_json, verify_cover};
use rgis::Graph;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cover) = parse_cover_json(text) else {
        return;
    };
    let n = cover.host_n();
    if n <= 64 {
        let host = Graph::cycle(n);
        let _ = verify_cover(&host, &cover);
    }
});
