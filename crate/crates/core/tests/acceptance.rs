//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use oldroyd_bkm::checks::{self, CriterionOutcome, Trajectory};
use oldroyd_bkm::spectral::Grid;
use oldroyd_bkm::Result;

const CHECK_BUDGET: Duration = Duration::from_secs(5 * 60);
const COARSE_RECORD_EVERY: u64 = checks::REFERENCE_RECORD_EVERY / 2;

fn coarse_reference() -> Result<Trajectory> {
    let grid = Grid::new(checks::REFERENCE_N)?;
    let dt = 2.0 * checks::REFERENCE_DT;
    let steps = (checks::REFERENCE_T_END / dt).round() as u64;
    Trajectory::compute(checks::reference_initial(&grid)?, dt, steps, COARSE_RECORD_EVERY, 0)
}

fn io_criterion(reference: &Trajectory) -> Result<CriterionOutcome> {
    let dir = tempfile::tempdir().expect("temporary directory");
    let exact = checks::checkpoint_round_trip(&reference.last, &dir.path().join("last.ivbk"))?;

    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_oldroyd-bkm"))
        .arg("check")
        .output()
        .expect("spawn the check subcommand");
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines = stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count();
    let passed = exact && out.status.success() && elapsed < CHECK_BUDGET && lines == 7;
    Ok(CriterionOutcome {
        id: 11,
        name: "IO and check subcommand",
        passed,
        detail: format!(
            "checkpoint bit-exact: {exact}; `check` exit {:?} after {:.1} s (budget {} s), {lines} criterion lines",
            out.status.code(),
            elapsed.as_secs_f64(),
            CHECK_BUDGET.as_secs()
        ),
    })
}

fn suite() -> Result<Vec<CriterionOutcome>> {
    let mut out = Vec::new();
    let mut report = |o: CriterionOutcome| {
        println!("{o}");
        out.push(o);
    };
    let n = checks::REFERENCE_N;
    let seed = checks::REFERENCE_SEED;

    report(checks::spectral_correctness(n)?);
    let reference = Trajectory::reference()?;
    report(checks::energy_conservation(&reference));
    report(checks::divergence_propagation(&reference));
    report(checks::curl_advection_identity(n, checks::CURL_IDENTITY_PAIRS, seed)?);
    report(checks::formulation_consistency(&reference)?);
    report(checks::rk4_order(n)?);
    let coarse = coarse_reference()?;
    let dynamic_max = reference.max_kato_ratio.max(coarse.max_kato_ratio);
    report(checks::kato_survey_criterion(n, seed, dynamic_max)?);
    report(checks::moser_survey_criterion(n, seed)?);
    report(checks::bkm_accumulator(&reference, &[&coarse]));
    report(checks::bound_monitors(&reference, &coarse)?);
    report(io_criterion(&reference)?);
    Ok(out)
}

fn main() -> ExitCode {
    let start = Instant::now();
    match suite() {
        Ok(outcomes) => {
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!(
                "acceptance: {} of {} criteria passed in {:.1} s",
                outcomes.len() - failed,
                outcomes.len(),
                start.elapsed().as_secs_f64()
            );
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            println!("acceptance: aborted: {e}");
            ExitCode::FAILURE
        }
    }
}
