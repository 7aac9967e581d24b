//! Full acceptance run: one line per criterion, nonzero exit on failure.

use skylink::{run_all, suite_passed, VerifyLevel};

fn main() {
    let results = run_all(VerifyLevel::Full, 0);
    for r in &results {
        println!("{r}");
    }
    if suite_passed(&results) {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        let failed = results.iter().filter(|r| !r.passed).count();
        println!("acceptance: {failed} of {} criteria FAILED", results.len());
        std::process::exit(1);
    }
}
