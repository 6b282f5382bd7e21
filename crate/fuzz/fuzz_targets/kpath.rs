#![no_main]

use anomalylab::model::ModelParams;
use anomalylab_cli::KPath;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(path) = text.parse::<KPath>() {
        let back: KPath = path.to_string().parse().expect("re-parse");
        assert_eq!(back, path);
        if path.segment_points * path.vertices.len() <= 100_000 {
            let pts = path.sample(&ModelParams::default());
            assert_eq!(pts.len(), path.segment_points * (path.vertices.len() - 1) + 1);
        }
    }
});
