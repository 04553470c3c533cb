//! Runs every acceptance criterion and prints one line per criterion.

use std::process::ExitCode;

use cobordlab::selftest::{Suite, CRITERIA};

fn main() -> ExitCode {
    let mut suite = Suite::new(20240601, None);
    let reports = suite.run_all();
    assert_eq!(reports.len(), CRITERIA as usize);
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<u32> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", reports.len() - failed.len(), reports.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
