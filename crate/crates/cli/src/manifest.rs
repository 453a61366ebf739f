//! Run manifest: config echo, versions, seed, wall time, and a content hash
//! per output file. The wall time makes the manifest itself non-reproducible;
//! every other artifact is byte-identical for a fixed config and seed.

use std::time::Duration;

use crate::run::Artifact;

/// FNV-1a, 64 bit.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn render(
    command: &str,
    seed: u64,
    config_text: &str,
    artifacts: &[Artifact],
    wall: Duration,
) -> String {
    let outputs: Vec<serde_json::Value> = artifacts
        .iter()
        .map(|a| {
            serde_json::json!({
                "file": a.name,
                "bytes": a.bytes.len(),
                "fnv1a64": format!("{:016x}", fnv1a64(&a.bytes)),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "wall_time_ms": wall.as_millis() as u64,
        "outputs": outputs,
        "config": config_text,
    });
    format!("{}\n", serde_json::to_string_pretty(&doc).unwrap())
}
