#![no_main]

use bose_chaos_cli::config::parse_config_text;
use libfuzzer_sys::fuzz_target;

fn parse(data: &[u8]) -> Option<()> {
    let text = std::str::from_utf8(data).ok()?;
    let map = parse_config_text(text).ok()?;
    let _ = bose_chaos_cli::RunConfig::from_map(bose_chaos_cli::Experiment::Spectrum, &map);
    Some(())
}

fuzz_target!(|data: &[u8]| {
    let _ = parse(data);
});
