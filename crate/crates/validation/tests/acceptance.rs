//! Prints one PASS/FAIL line per acceptance criterion and fails when any
//! criterion does. Run with `cargo test -p optosync-validation --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let start = Instant::now();
    let mut failed = 0;
    for check in optosync_validation::all() {
        let outcome = check();
        println!("{}", outcome.line());
        if !outcome.pass {
            failed += 1;
        }
    }
    let total = start.elapsed().as_secs_f64();
    let fast = total < 600.0;
    println!(
        "{} [runtime] full suite {total:.1} s (target < 600 s)",
        if fast { "PASS" } else { "FAIL" }
    );
    if !fast {
        failed += 1;
    }
    println!("{failed} failing");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
