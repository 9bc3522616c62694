//! Run the invariant battery that backs `thermal-machines verify`.
//!
//!     cargo run --release --example self_check

fn main() {
    let report = thermal_machines::verify::run_battery(0);
    for c in &report.checks {
        println!(
            "{} {:<28} {:.2e} (tol {:.0e})",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
}
