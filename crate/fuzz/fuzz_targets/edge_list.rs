#![no_main]

use libfuzzer_sys::fuzz_target;
use rgis::Graph;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // small limit so a header cannot request a huge allocation
    if let Ok(g) = Graph::from_edge_list_with_limit(text, 512) {
        let again = Graph::from_edge_list(&g.to_edge_list()).expect("round trip");
        assert_eq!(g.to_edge_list(), again.to_edge_list());
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }
});
