//! Run configuration and its `key = value` file format.
//!
//! One setting per line, `#` starts a comment, keys are the dotted field
//! paths of [`RunConfig`]:
//!
//! ```text
//! grid_n = 32
//! initial.kind = taylor_green
//! initial.f_perturbation_amplitude = 0.1
//! step.mode = fixed_dt
//! step.dt = 1e-3
//! step.t_end = 1.0
//! output_path = tg.csv
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::{StepControl, StepMode};
use crate::error::{Error, Result};
use crate::fields::{InitialCondition, InitialKind};
use crate::tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid_n: usize,
    pub initial: InitialCondition,
    pub step: StepControl,
    /// Steps between diagnostics records.
    pub output_every: u64,
    pub output_path: PathBuf,
    /// Steps between checkpoints; 0 writes only the final one.
    pub checkpoint_every: u64,
    pub tail_halt_threshold: f64,
    pub sobolev_s: u32,
}

const KEYS: &[&str] = &[
    "grid_n",
    "initial.kind",
    "initial.amplitude",
    "initial.f_perturbation_amplitude",
    "initial.spectrum_exponent",
    "initial.seed",
    "initial.path",
    "step.mode",
    "step.dt",
    "step.cfl_number",
    "step.t_end",
    "step.max_steps",
    "output_every",
    "output_path",
    "checkpoint_every",
    "tail_halt_threshold",
    "sobolev_s",
];

impl RunConfig {
    pub fn new(grid_n: usize, initial: InitialCondition, step: StepControl) -> Self {
        RunConfig {
            grid_n,
            initial,
            step,
            output_every: 1,
            output_path: PathBuf::from("diagnostics.csv"),
            checkpoint_every: 0,
            tail_halt_threshold: tolerances::TAIL_HALT_DEFAULT,
            sobolev_s: 3,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    /// Checks every field. Does not allocate a grid.
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            return Err(Error::InvalidGrid(self.grid_n));
        }
        if self.output_every < 1 {
            return Err(Error::InvalidArgument("output_every must be at least 1".into()));
        }
        if self.sobolev_s < 3 || self.sobolev_s > tolerances::MAX_SOBOLEV_INDEX {
            return Err(Error::InvalidArgument(format!(
                "sobolev_s must lie in 3..={}, got {}",
                tolerances::MAX_SOBOLEV_INDEX,
                self.sobolev_s
            )));
        }
        if !(self.tail_halt_threshold > 0.0 && self.tail_halt_threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tail_halt_threshold must lie in (0, 1], got {}",
                self.tail_halt_threshold
            )));
        }
        self.initial.validate()?;
        self.step.validate()
    }

    /// Renders the config back into the file format.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("grid_n", self.grid_n.to_string());
        put("initial.kind", self.initial.kind.as_str().into());
        put("initial.amplitude", format!("{:?}", self.initial.amplitude));
        put(
            "initial.f_perturbation_amplitude",
            format!("{:?}", self.initial.f_perturbation_amplitude),
        );
        put("initial.spectrum_exponent", format!("{:?}", self.initial.spectrum_exponent));
        put("initial.seed", self.initial.seed.to_string());
        if let Some(p) = &self.initial.path {
            put("initial.path", p.display().to_string());
        }
        match self.step.mode {
            StepMode::FixedDt => {
                put("step.mode", "fixed_dt".into());
                put("step.dt", format!("{:?}", self.step.dt));
            }
            StepMode::Cfl => {
                put("step.mode", "cfl".into());
                put("step.cfl_number", format!("{:?}", self.step.cfl_number));
            }
        }
        put("step.t_end", format!("{:?}", self.step.t_end));
        if self.step.max_steps != u64::MAX {
            put("step.max_steps", self.step.max_steps.to_string());
        }
        put("output_every", self.output_every.to_string());
        put("output_path", self.output_path.display().to_string());
        put("checkpoint_every", self.checkpoint_every.to_string());
        put("tail_halt_threshold", format!("{:?}", self.tail_halt_threshold));
        put("sobolev_s", self.sobolev_s.to_string());
        out
    }
}

struct Entries {
    values: HashMap<&'static str, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(Error::config(line, content, "expected `key = value`"));
            };
            let (k, v) = (k.trim(), v.trim());
            let Some(&key) = KEYS.iter().find(|&&known| known == k) else {
                return Err(Error::config(line, k, "unknown key"));
            };
            if v.is_empty() {
                return Err(Error::config(line, k, "missing value"));
            }
            if let Some((first, _)) = values.insert(key, (line, v.to_string())) {
                return Err(Error::config(line, k, format!("duplicate key, first set on line {first}")));
            }
        }
        Ok(Entries { values })
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |(l, _)| *l)
    }

    fn get<T: FromStr>(&self, key: &'static str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::config(*line, key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn require<T: FromStr>(&self, key: &'static str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| Error::config(0, key, "required key is missing"))
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let e = Entries::parse(text)?;

        let grid_n: usize = e.require("grid_n")?;
        if grid_n < 8 || grid_n % 2 != 0 {
            return Err(Error::config(
                e.line("grid_n"),
                "grid_n",
                format!("{grid_n} points per dimension: must be even and at least 8"),
            ));
        }

        let kind: InitialKind = e.require("initial.kind")?;
        let mut initial = InitialCondition::new(kind);
        if let Some(a) = e.get("initial.amplitude")? {
            initial.amplitude = a;
        }
        if let Some(a) = e.get("initial.f_perturbation_amplitude")? {
            initial.f_perturbation_amplitude = a;
        }
        if let Some(x) = e.get("initial.spectrum_exponent")? {
            initial.spectrum_exponent = x;
        }
        if let Some(s) = e.get("initial.seed")? {
            initial.seed = s;
        }
        initial.path = e.get::<PathBuf>("initial.path")?;
        initial
            .validate()
            .map_err(|err| Error::config(e.line("initial.kind"), "initial", err.to_string()))?;

        let mode: String = e.require("step.mode")?;
        let t_end: f64 = e.require("step.t_end")?;
        let mut step = match mode.as_str() {
            "fixed_dt" | "fixed" => StepControl::fixed(e.require("step.dt")?, t_end),
            "cfl" => {
                let c = e.get("step.cfl_number")?.unwrap_or(0.5);
                StepControl::cfl(c, t_end)
            }
            other => {
                return Err(Error::config(
                    e.line("step.mode"),
                    "step.mode",
                    format!("unknown mode `{other}`, expected fixed_dt or cfl"),
                ))
            }
        };
        if step.mode == StepMode::Cfl {
            if let Some((line, _)) = e.values.get("step.dt") {
                return Err(Error::config(*line, "step.dt", "dt is only meaningful in fixed_dt mode"));
            }
        } else if let Some((line, _)) = e.values.get("step.cfl_number") {
            return Err(Error::config(*line, "step.cfl_number", "cfl_number is only meaningful in cfl mode"));
        }
        if let Some(m) = e.get("step.max_steps")? {
            step.max_steps = m;
        }
        step.validate()
            .map_err(|err| Error::config(e.line("step.mode"), "step", err.to_string()))?;

        let mut config = RunConfig::new(grid_n, initial, step);
        if let Some(v) = e.get("output_every")? {
            config.output_every = v;
        }
        if let Some(v) = e.get("output_path")? {
            config.output_path = v;
        }
        if let Some(v) = e.get("checkpoint_every")? {
            config.checkpoint_every = v;
        }
        if let Some(v) = e.get("tail_halt_threshold")? {
            config.tail_halt_threshold = v;
        }
        if let Some(v) = e.get("sobolev_s")? {
            config.sobolev_s = v;
        }
        if config.output_every < 1 {
            return Err(Error::config(e.line("output_every"), "output_every", "must be at least 1"));
        }
        if config.sobolev_s < 3 || config.sobolev_s > tolerances::MAX_SOBOLEV_INDEX {
            return Err(Error::config(
                e.line("sobolev_s"),
                "sobolev_s",
                format!("must lie in 3..={}", tolerances::MAX_SOBOLEV_INDEX),
            ));
        }
        if !(config.tail_halt_threshold > 0.0 && config.tail_halt_threshold <= 1.0) {
            return Err(Error::config(
                e.line("tail_halt_threshold"),
                "tail_halt_threshold",
                "must lie in (0, 1]",
            ));
        }
        Ok(config)
    }
}
