//! Seeded randomized checks of the operator and entropy inequalities.

use qsrlab::verify::{run_suite, Suite};

fn main() -> qsrlab::Result<()> {
    for suite in Suite::ALL {
        let r = run_suite(suite, 20, 1, None)?;
        println!(
            "{:<16} checks {:>4}  failures {}  worst margin {:.3e}",
            suite.to_string(),
            r.checks,
            r.failures.len(),
            r.worst_margin
        );
    }
    Ok(())
}
