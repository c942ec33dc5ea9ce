use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::GridProvenance;
use crate::kinematics::{DhModel, JointLimits, DEFAULT_SINGULAR_TOL};
use crate::pathmodel::{
    circle_path_with_period, task_path_from, AdjustmentGrid, PathSpec, RedundancyGrid, DEFAULT_COMM_PERIOD,
};
use crate::planner::StepConstraint;

pub const CONFIG_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSource {
    /// Radius 0.1 m circle at height 0.1 m, starting at angle -pi.
    Circle { n: usize, duration: f64 },
    /// 101-point circle at height 0.2 m; `theta0` moves the seam.
    Task {
        #[serde(default)]
        theta0: f64,
    },
    Csv { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub m: usize,
    pub o: usize,
    pub y_max: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { m: 61, o: 10, y_max: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Margin {
    /// `qd_max^2 / (2 qdd_max)` per joint.
    Stopping,
    None,
    Explicit([f64; 7]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitOverrides {
    pub plan_fraction: f64,
    pub margin: Margin,
    pub singular_tol: f64,
}

impl Default for LimitOverrides {
    fn default() -> Self {
        Self { plan_fraction: 0.5, margin: Margin::Stopping, singular_tol: DEFAULT_SINGULAR_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    Zero,
    Scripted { file: PathBuf },
    RandomWalk { seed: u64, step_bound: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub path: PathSource,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default = "default_comm_period")]
    pub comm_period: f64,
    #[serde(default)]
    pub limits: LimitOverrides,
    #[serde(default = "default_signal")]
    pub signal: SignalSpec,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA
}

fn default_comm_period() -> f64 {
    DEFAULT_COMM_PERIOD
}

fn default_signal() -> SignalSpec {
    SignalSpec::Zero
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ScenarioConfig {
    /// The circle experiment with default grids.
    pub fn circle() -> Self {
        Self {
            schema: CONFIG_SCHEMA,
            path: PathSource::Circle { n: 100, duration: 10.0 },
            grid: GridParams::default(),
            comm_period: DEFAULT_COMM_PERIOD,
            limits: LimitOverrides::default(),
            signal: SignalSpec::Zero,
            out: default_out(),
        }
    }

    /// The task circle with a seeded random walk.
    pub fn task(seed: u64) -> Self {
        Self {
            path: PathSource::Task { theta0: 0.0 },
            signal: SignalSpec::RandomWalk { seed, step_bound: 10 },
            ..Self::circle()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.schema != CONFIG_SCHEMA {
            return bad(format!("config schema {} is not supported (expected {CONFIG_SCHEMA})", self.schema));
        }
        if self.grid.m < 2 || self.grid.o == 0 || !(self.grid.y_max > 0.0) {
            return bad("grid needs m >= 2, o >= 1 and y_max > 0".into());
        }
        if !(self.comm_period > 0.0) {
            return bad("communication period must be positive".into());
        }
        if !(self.limits.plan_fraction > 0.0 && self.limits.plan_fraction < 1.0) {
            return bad(format!("plan fraction {} must lie in (0, 1)", self.limits.plan_fraction));
        }
        if !(self.limits.singular_tol >= 0.0) {
            return bad("singularity tolerance must be non-negative".into());
        }
        for file in self.referenced_files() {
            if !file.exists() {
                return bad(format!("referenced file {} does not exist", file.display()));
            }
        }
        Ok(())
    }

    fn referenced_files(&self) -> Vec<&Path> {
        let mut v = Vec::new();
        if let PathSource::Csv { file } = &self.path {
            v.push(file.as_path());
        }
        if let SignalSpec::Scripted { file } = &self.signal {
            v.push(file.as_path());
        }
        v
    }

    pub fn build_path(&self) -> Result<PathSpec> {
        match &self.path {
            PathSource::Circle { n, duration } => circle_path_with_period(*n, *duration, self.comm_period),
            PathSource::Task { theta0 } => {
                let p = task_path_from(*theta0);
                PathSpec::new(p.poses().to_vec(), p.sample_interval(), self.comm_period)
            }
            PathSource::Csv { file } => PathSpec::read_csv(File::open(file)?, self.comm_period),
        }
    }

    pub fn limits(&self) -> JointLimits {
        JointLimits::panda()
    }

    pub fn step_constraint(&self, sample_interval: f64) -> StepConstraint {
        let sc = StepConstraint::from_limits(&self.limits(), sample_interval, self.limits.plan_fraction);
        match &self.limits.margin {
            Margin::Stopping => sc,
            Margin::None => sc.with_margin([0.0; 7]),
            Margin::Explicit(m) => sc.with_margin(*m),
        }
    }

    pub fn redundancy(&self) -> Result<RedundancyGrid> {
        RedundancyGrid::spanning(&self.limits(), self.grid.m)
    }

    pub fn adjustment(&self) -> Result<AdjustmentGrid> {
        AdjustmentGrid::new(self.grid.y_max, self.grid.o)
    }

    /// Everything a feasibility grid depends on, without building it.
    pub fn provenance(&self) -> Result<GridProvenance> {
        Ok(GridProvenance {
            model: DhModel::panda(),
            path: self.build_path()?,
            redundancy: self.redundancy()?,
            adjustment: self.adjustment()?,
            limits: self.limits(),
            singular_tol: self.limits.singular_tol,
        })
    }
}
