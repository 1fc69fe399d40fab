//! Runs the identity suite on a system file, exactly and at seeded random
//! points.
//!
//!     cargo run --example identity_suite -- crates/core/fixtures/gauge.sys

use std::path::PathBuf;

use singlag::report::{render_verification, Analysis, SystemSpec};
use singlag::verify::NumericOptions;

fn main() -> singlag::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/conformal.sys")
    });
    let analysis = Analysis::new(SystemSpec::from_path(&path)?)?;
    let report = analysis.verify(Some(NumericOptions::default()))?;
    print!("{}", render_verification(&report));
    println!("{} identities, failing: {:?}", report.rows.len(), report.failing_tags());
    Ok(())
}
