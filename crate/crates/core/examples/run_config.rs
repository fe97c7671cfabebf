//! Runs a bundled configuration through the same pipeline as the command
//! line tool and prints the checks.
//!
//! `cargo run --release --example run_config -- crates/core/configs/disc_small.toml`

use std::path::PathBuf;

use tvcalib::run;

fn main() -> tvcalib::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/disc_small.toml"));
    let out = std::env::temp_dir().join("tvcalib_run_config");
    let outcome = run::run(&path, Some(&out), None)?;
    for c in outcome.report["checks"].as_array().into_iter().flatten() {
        let tag = if c["passed"].as_bool() == Some(true) {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{tag} {} = {}", c["name"].as_str().unwrap_or("?"), c["value"]);
    }
    println!("artifacts in {}: {:?}", out.display(), outcome.artifacts);
    Ok(())
}
