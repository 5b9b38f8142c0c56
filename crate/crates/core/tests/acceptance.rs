//! Full acceptance battery: one PASS/FAIL line per criterion, nonzero exit
//! if any criterion fails.
//!
//! `cargo test --release --test acceptance`

use std::process::{Command, ExitCode};
use std::time::Instant;

use cstar_rank::verify::{self, CriterionOutcome, SuiteOptions};

/// Criterion 8 through the binary: two `density` invocations, compared byte for byte.
fn density_cli_reproducible() -> CriterionOutcome {
    let args = [
        "density",
        "--blocks",
        "1,2",
        "--rows",
        "2",
        "--cols",
        "5",
        "--k",
        "3",
        "--trials",
        "1000",
        "--seed",
        "7",
        "--no-timestamp",
    ];
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_cstar-rank"))
            .args(args)
            .env_remove("CSTAR_RANK_TOL")
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let identical = a.status.success() && b.status.success() && a.stdout == b.stdout;
    CriterionOutcome {
        id: 8,
        name: "reproducible density (CLI)",
        passed: identical,
        detail: format!(
            "two runs, {} and {} bytes, identical: {identical}",
            a.stdout.len(),
            b.stdout.len()
        ),
    }
}

fn main() -> ExitCode {
    let opts = SuiteOptions::default();
    let checks: Vec<Box<dyn Fn() -> CriterionOutcome>> = vec![
        Box::new(|| verify::formula_grid(&opts)),
        Box::new(|| verify::dual_witness_suite(&opts)),
        Box::new(|| verify::unimodular_equals_generators(&opts)),
        Box::new(|| verify::warfield_suite(&opts)),
        Box::new(|| verify::perturbation_suite(&opts)),
        Box::new(|| verify::negative_control(&opts)),
        Box::new(|| verify::kernel_numerics(&opts)),
        Box::new(density_cli_reproducible),
        Box::new(|| verify::reproducibility(&opts)),
    ];
    println!("acceptance: seed {}, tol {:e}", opts.seed, opts.tol);
    let mut failed = 0;
    for check in &checks {
        let start = Instant::now();
        let outcome = check();
        println!("{outcome} ({:.1}s)", start.elapsed().as_secs_f64());
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} checks, {failed} failed", checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
