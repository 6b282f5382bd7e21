#![no_main]

use anomalylab_cli::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ScenarioConfig::from_json(text) {
        // Anything accepted must survive a write/read cycle unchanged.
        let back = ScenarioConfig::from_json(&cfg.to_json()).expect("re-parse");
        assert_eq!(back, cfg);
    }
});
