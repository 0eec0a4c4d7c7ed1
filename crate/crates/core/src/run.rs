//! Run orchestration: stepping, records, checkpoints and the run summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::curl_system::CoEvolution;
use crate::dynamics;
use crate::error::{Error, Result};
use crate::fields::{self, State};
use crate::io;
use crate::monitor::{self, BoundCheck, DiagnosticsRecord};
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaltReason {
    Completed,
    ResolutionLost,
    NonFinite,
    /// `step.max_steps` reached before `t_end`.
    StepLimit,
}

impl HaltReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            HaltReason::Completed => "completed",
            HaltReason::ResolutionLost => "resolution_lost",
            HaltReason::NonFinite => "nonfinite",
            HaltReason::StepLimit => "step_limit",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HaltReason::Completed | HaltReason::StepLimit => 0,
            HaltReason::ResolutionLost => 2,
            HaltReason::NonFinite => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub halt: HaltReason,
    pub steps: u64,
    pub time: f64,
    pub records: usize,
    pub final_m: f64,
    pub final_y: f64,
    pub energy_bound: BoundCheck,
    pub curl_bound: BoundCheck,
    /// `L²` distance between the co-evolved curls and the curls of the state.
    pub curl_consistency: f64,
    pub detail: Option<String>,
    pub diagnostics: PathBuf,
    pub checkpoint: Option<PathBuf>,
}

impl RunSummary {
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "halt_reason = {}", self.halt.as_str());
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "time = {:.16e}", self.time);
        let _ = writeln!(s, "records = {}", self.records);
        let _ = writeln!(s, "bkm_m = {:.16e}", self.final_m);
        let _ = writeln!(s, "gronwall_y = {:.16e}", self.final_y);
        let _ = writeln!(s, "energy_bound_lhs = {:.16e}", self.energy_bound.lhs);
        let _ = writeln!(s, "energy_bound_integral = {:.16e}", self.energy_bound.exponent_integral);
        let _ = writeln!(s, "energy_implied_c = {:.16e}", self.energy_bound.implied_c);
        let _ = writeln!(s, "curl_bound_lhs = {:.16e}", self.curl_bound.lhs);
        let _ = writeln!(s, "curl_bound_integral = {:.16e}", self.curl_bound.exponent_integral);
        let _ = writeln!(s, "curl_implied_c = {:.16e}", self.curl_bound.implied_c);
        let _ = writeln!(s, "curl_consistency = {:.16e}", self.curl_consistency);
        if let Some(d) = &self.detail {
            let _ = writeln!(s, "detail = {d}");
        }
        let _ = writeln!(s, "diagnostics = {}", self.diagnostics.display());
        if let Some(c) = &self.checkpoint {
            let _ = writeln!(s, "checkpoint = {}", c.display());
        }
        s
    }
}

/// `dir/stem_00000120.ivbk` next to the diagnostics file.
pub fn checkpoint_path(output: &Path, tag: &str) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    output.with_file_name(format!("{stem}_{tag}.ivbk"))
}

pub fn summary_path(output: &Path) -> PathBuf {
    output.with_extension("summary")
}

/// A configured run in progress.
pub struct Simulation {
    config: RunConfig,
    grid: Grid,
    co: CoEvolution,
    steps: u64,
    records: Vec<DiagnosticsRecord>,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = Grid::new(config.grid_n)?;
        let state = fields::make_initial(&config.initial, &grid)?;
        Self::from_state(config, state)
    }

    /// Continues from `state`; integrals restart at `state.time`.
    pub fn from_state(config: RunConfig, state: State) -> Result<Self> {
        config.validate()?;
        if state.grid().n() != config.grid_n {
            return Err(Error::GridMismatch(state.grid().n(), config.grid_n));
        }
        if state.time >= config.step.t_end {
            return Err(Error::InvalidArgument(format!(
                "state time {} is already past t_end {}",
                state.time, config.step.t_end
            )));
        }
        let grid = state.grid().clone();
        Ok(Simulation {
            config,
            grid,
            co: CoEvolution::new(state),
            steps: 0,
            records: Vec::new(),
        })
    }

    pub fn state(&self) -> &State {
        &self.co.state
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    fn record(&mut self, state: &State) -> Result<()> {
        if self.records.last().is_some_and(|r| r.time >= state.time) {
            return Ok(());
        }
        let rec = monitor::compute_record(state, self.records.last(), self.config.sobolev_s)?;
        let path = &self.config.output_path;
        if self.records.is_empty() {
            io::write_diagnostics(path, std::slice::from_ref(&rec))?;
        } else {
            io::append_diagnostics(path, std::slice::from_ref(&rec), false)?;
        }
        self.records.push(rec);
        Ok(())
    }

    fn maybe_checkpoint(&self, state: &State, step: u64) -> Result<()> {
        let every = self.config.checkpoint_every;
        if every > 0 && step % every == 0 {
            io::write_checkpoint(state, checkpoint_path(&self.config.output_path, &format!("{step:08}")))?;
        }
        Ok(())
    }

    /// Steps to `t_end` or a halt. Each advance covers two primal steps.
    pub fn run(&mut self) -> Result<RunSummary> {
        if let Some(dir) = self.config.output_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let initial = self.co.state.clone();
        self.record(&initial)?;
        let ctl = self.config.step.clone();
        let every = self.config.output_every;
        let mut detail = None;

        let halt = loop {
            let remaining = ctl.t_end - self.co.state.time;
            if remaining <= 0.0 {
                break HaltReason::Completed;
            }
            if self.steps + 2 > ctl.max_steps {
                break HaltReason::StepLimit;
            }
            let mut dt = dynamics::choose_dt(&self.co.state, &ctl, &self.grid);
            let last_pair = remaining <= 2.0 * dt * (1.0 + 1e-9);
            if last_pair {
                dt = 0.5 * remaining;
            }
            let mid = match self.co.advance(dt) {
                Ok(mid) => mid,
                Err(Error::NonFinite(what)) => {
                    detail = Some(format!("non-finite value in {what} after step {}", self.steps));
                    break HaltReason::NonFinite;
                }
                Err(e) => return Err(e),
            };
            if last_pair {
                self.co.state.time = ctl.t_end;
                self.co.curl.time = ctl.t_end;
            }
            self.steps += 2;
            if (self.steps - 1) % every == 0 {
                self.record(&mid)?;
            }
            self.maybe_checkpoint(&mid, self.steps - 1)?;
            let end = self.co.state.clone();
            if self.steps % every == 0 {
                self.record(&end)?;
            }
            self.maybe_checkpoint(&end, self.steps)?;

            let tail = dynamics::tail_energy_fraction(&end);
            if tail > self.config.tail_halt_threshold {
                detail = Some(format!(
                    "tail energy fraction {tail:.3e} exceeds {:.3e} at t = {}",
                    self.config.tail_halt_threshold, end.time
                ));
                break HaltReason::ResolutionLost;
            }
        };

        let last = self.co.state.clone();
        self.record(&last)?;
        let checkpoint = checkpoint_path(&self.config.output_path, "final");
        io::write_checkpoint(&last, &checkpoint)?;

        let first = &self.records[0];
        let fin = self.records.last().expect("initial record");
        let summary = RunSummary {
            halt,
            steps: self.steps,
            time: last.time,
            records: self.records.len(),
            final_m: fin.bkm_m,
            final_y: fin.gronwall_y,
            energy_bound: monitor::energy_bound_check(fin, &self.records, first)?,
            curl_bound: monitor::curl_l2_bound_check(fin, &self.records, first)?,
            curl_consistency: self.co.consistency_error(),
            detail,
            diagnostics: self.config.output_path.clone(),
            checkpoint: Some(checkpoint),
        };
        let path = summary_path(&self.config.output_path);
        std::fs::write(&path, summary.to_key_value()).map_err(|e| Error::io(&path, e))?;
        Ok(summary)
    }
}

/// Runs a config from its initial condition.
pub fn run(config: RunConfig) -> Result<RunSummary> {
    Simulation::new(config)?.run()
}

/// Continues from a checkpoint with the stepping and output settings of
/// `config`.
pub fn resume(checkpoint: &Path, config: RunConfig) -> Result<RunSummary> {
    let state = io::read_checkpoint(checkpoint)?;
    Simulation::from_state(config, state)?.run()
}
