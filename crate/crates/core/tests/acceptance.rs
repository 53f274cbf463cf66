use std::process::ExitCode;

use teleport_core::acceptance::{run_all, DEFAULT_SEED};

fn main() -> ExitCode {
    let report = run_all(DEFAULT_SEED);
    print!("{}", report.render());
    for r in &report.results {
        eprintln!("criterion {:>2}: {:.2} s", r.id, r.elapsed.as_secs_f64());
    }
    eprintln!("total: {:.2} s", report.elapsed.as_secs_f64());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
