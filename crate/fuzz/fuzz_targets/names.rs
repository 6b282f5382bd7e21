#![no_main]

use anomalylab::dirac::DiracPhase;
use anomalylab::raman::{DepthRatio, Species};
use anomalylab_cli::OracleMode;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = text.parse::<Species>() {
        assert_eq!(v.to_string().parse::<Species>().ok(), Some(v));
    }
    if let Ok(v) = text.parse::<DepthRatio>() {
        assert_eq!(v.to_string().parse::<DepthRatio>().ok(), Some(v));
    }
    if let Ok(v) = text.parse::<OracleMode>() {
        assert_eq!(v.to_string().parse::<OracleMode>().ok(), Some(v));
    }
    if let Ok(v) = text.parse::<DiracPhase>() {
        assert_eq!(v.to_string().parse::<DiracPhase>().ok(), Some(v));
    }
});
