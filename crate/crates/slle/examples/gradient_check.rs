//! Run the built-in verification suite: the precision-gradient check against
//! central finite differences, the spherical closed form against a
//! golden-section search, EM monotonicity, and the minimum-norm property.
//!
//! Run with: `cargo run --example gradient_check`

use slle::verify::run_default_suite;

fn main() -> slle::Result<()> {
    for check in run_default_suite(0)? {
        let status = if check.pass { "PASS" } else { "FAIL" };
        println!("{status}  {}\n      {}", check.name, check.detail);
    }
    Ok(())
}
