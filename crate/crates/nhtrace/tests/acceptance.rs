//! Runs every acceptance criterion at its stated size and tolerance and prints
//! one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;

use nhtrace::acceptance::{run_criterion, AcceptanceOptions, CRITERIA};

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary output directory");
    let opts = AcceptanceOptions {
        out_dir: dir.path().to_path_buf(),
        threads: None,
        cache: None,
    };
    let mut failed = 0;
    for id in CRITERIA {
        match run_criterion(id, &opts) {
            Ok(outcome) => {
                println!("{outcome}");
                failed += usize::from(!outcome.pass());
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL: {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
