//! Full analysis of a system file, as text and as JSON.
//!
//!     cargo run --example report -- crates/core/fixtures/difference.sys

use std::path::PathBuf;

use singlag::report::{render_analysis, Analysis, SystemSpec};

fn main() -> singlag::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/conformal.sys")
    });
    let report = Analysis::new(SystemSpec::from_path(&path)?)?.report()?;
    print!("{}", render_analysis(&report));
    println!("\n{}", report.to_json());
    Ok(())
}
