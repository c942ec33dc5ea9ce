use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::audit::{validate_trajectory, AuditReport};
use super::baseline::{baseline_online, BaselineRun};
use super::config::ScenarioConfig;
use super::signal::adjustment_signal;
use super::sim::{simulate, TrajectoryLog};
use crate::error::{Error, Result};
use crate::feasibility::{build_grid, Atlas, FeasibilityGrid};
use crate::planner::{compute_dp, max_adjust_step, verify_table, DpTable, TableAudit};

pub const PATH_FILE: &str = "path.csv";
pub const ATLAS_FILE: &str = "atlas.csv";
pub const TABLE_FILE: &str = "table.json";
pub const PLAN_FILE: &str = "plan.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const AUDIT_CSV_FILE: &str = "audit.csv";
pub const AUDIT_FILE: &str = "audit.json";
pub const BASELINE_TRAJECTORY_FILE: &str = "baseline_trajectory.csv";
pub const BASELINE_FILE: &str = "baseline.json";

pub const SUMMARY_SCHEMA: u32 = 1;

/// Written next to the atlas and table; binds them to the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub schema: u32,
    pub n: usize,
    pub m: usize,
    pub o: usize,
    pub d_max: i32,
    pub delta_m: f64,
    pub j0: usize,
    pub feasible_cells: usize,
    pub grid_hash: String,
    pub atlas_sha256: String,
    pub table_sha256: String,
}

pub struct Plan {
    pub grid: FeasibilityGrid,
    pub table: DpTable,
    pub summary: PlanSummary,
    pub grid_time: Duration,
    pub dp_time: Duration,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn out_file(cfg: &ScenarioConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(bytes)?;
    f.flush()?;
    Ok(())
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

/// Build the grid only and write the path and atlas.
pub fn run_grid(cfg: &ScenarioConfig) -> Result<(FeasibilityGrid, Duration)> {
    cfg.validate()?;
    let prov = cfg.provenance()?;
    let start = Instant::now();
    let grid = build_grid(&prov.model, &prov.path, &prov.redundancy, &prov.adjustment, &prov.limits, prov.singular_tol)?;
    let elapsed = start.elapsed();
    fs::create_dir_all(&cfg.out)?;
    write_bytes(&out_file(cfg, PATH_FILE), &csv_bytes(|b| prov.path.write_csv(b))?)?;
    write_bytes(&out_file(cfg, ATLAS_FILE), &csv_bytes(|b| grid.export_atlas(b))?)?;
    Ok((grid, elapsed))
}

/// Grid, dynamic program and persisted artifacts. Fails with
/// [`Error::NoFeasibleStart`] (after writing the atlas) when the path cannot
/// be completed even without adjustment.
pub fn run_plan(cfg: &ScenarioConfig) -> Result<Plan> {
    let (grid, grid_time) = run_grid(cfg)?;
    let sc = cfg.step_constraint(grid.provenance.path.sample_interval());
    let start = Instant::now();
    let table = compute_dp(&grid, &sc)?;
    let dp_time = start.elapsed();

    let atlas_bytes = fs::read(out_file(cfg, ATLAS_FILE))?;
    let table_json = table.to_json()?;
    write_bytes(&out_file(cfg, TABLE_FILE), table_json.as_bytes())?;
    let step = max_adjust_step(&table);
    let summary = PlanSummary {
        schema: SUMMARY_SCHEMA,
        n: table.n(),
        m: table.m(),
        o: table.o(),
        d_max: step.d_max,
        delta_m: step.delta,
        j0: step.j0,
        feasible_cells: grid.atlas.feasible_count(),
        grid_hash: table.grid_hash.clone(),
        atlas_sha256: sha256_hex(&atlas_bytes),
        table_sha256: sha256_hex(table_json.as_bytes()),
    };
    write_bytes(&out_file(cfg, PLAN_FILE), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(Plan { grid, table, summary, grid_time, dp_time })
}

/// Read the artifacts in `cfg.out` back and check they belong to `cfg`.
pub fn load_plan(cfg: &ScenarioConfig) -> Result<(FeasibilityGrid, DpTable, PlanSummary)> {
    cfg.validate()?;
    let summary: PlanSummary = serde_json::from_reader(BufReader::new(File::open(out_file(cfg, PLAN_FILE))?))?;
    let atlas_bytes = fs::read(out_file(cfg, ATLAS_FILE))?;
    let table_json = fs::read_to_string(out_file(cfg, TABLE_FILE))?;
    let mismatch = |what: &str, expected: &str, found: &str| Error::ArtifactMismatch {
        expected: format!("{what} {expected}"),
        found: found.to_string(),
    };
    let atlas_sha = sha256_hex(&atlas_bytes);
    if atlas_sha != summary.atlas_sha256 {
        return Err(mismatch("atlas", &summary.atlas_sha256, &atlas_sha));
    }
    let table_sha = sha256_hex(table_json.as_bytes());
    if table_sha != summary.table_sha256 {
        return Err(mismatch("table", &summary.table_sha256, &table_sha));
    }
    let provenance = cfg.provenance()?;
    let live = provenance.hash();
    if live != summary.grid_hash {
        return Err(mismatch("config", &live, &summary.grid_hash));
    }
    let table = DpTable::from_json(&table_json)?;
    if table.grid_hash != live {
        return Err(mismatch("config", &live, &table.grid_hash));
    }
    let sc = cfg.step_constraint(provenance.path.sample_interval());
    if table.constraint != sc {
        return Err(mismatch("step constraint", &format!("{sc:?}"), &format!("{:?}", table.constraint)));
    }
    let atlas = Atlas::read_csv(atlas_bytes.as_slice())?;
    let dims = (atlas.n_points(), atlas.m(), atlas.o());
    let want = (provenance.path.poses().len(), provenance.redundancy.m, provenance.adjustment.o);
    if dims != want {
        return Err(mismatch("atlas dimensions", &format!("{want:?}"), &format!("{dims:?}")));
    }
    Ok((FeasibilityGrid { atlas, provenance }, table, summary))
}

pub struct SimulationRun {
    pub signal: Vec<i32>,
    pub log: TrajectoryLog,
    pub audit: AuditReport,
}

/// Load the plan, generate the adjustment signal, run and audit.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<SimulationRun> {
    let (grid, table, _) = load_plan(cfg)?;
    let signal = adjustment_signal(&cfg.signal, table.d_max(), table.o(), table.n())?;
    let log = simulate(&grid, &table, &signal)?;
    let p = &grid.provenance;
    let desired: Vec<_> = (0..=table.n()).map(|i| grid.target_pose(i, signal[i])).collect();
    let audit = validate_trajectory(&log, &p.limits, &p.model, &desired);
    write_bytes(&out_file(cfg, TRAJECTORY_FILE), &csv_bytes(|b| log.write_csv(b))?)?;
    write_bytes(&out_file(cfg, SAMPLES_FILE), &csv_bytes(|b| log.write_samples_csv(b))?)?;
    write_bytes(&out_file(cfg, AUDIT_CSV_FILE), &csv_bytes(|b| audit.write_errors_csv(b))?)?;
    write_bytes(&out_file(cfg, AUDIT_FILE), serde_json::to_string_pretty(&audit)?.as_bytes())?;
    Ok(SimulationRun { signal, log, audit })
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSummary {
    pub n: usize,
    pub completed: bool,
    pub halt_index: Option<usize>,
    pub limiting_joint: Option<usize>,
    pub start_branch: usize,
}

/// Greedy online run from the planner's start joints.
pub fn run_baseline(cfg: &ScenarioConfig) -> Result<(BaselineRun, BaselineSummary)> {
    let (grid, table, _) = load_plan(cfg)?;
    let p = &grid.provenance;
    let q0 = grid.get(0, table.j0(), 0).ok_or(Error::NoFeasibleStart)?;
    let run = baseline_online(&p.model, &p.path, &p.redundancy, q0, &p.limits, &table.constraint, p.singular_tol);
    let summary = BaselineSummary {
        n: p.path.n(),
        completed: run.completed(),
        halt_index: run.halt.map(|h| h.index),
        limiting_joint: run.halt.map(|h| h.limiting_joint),
        start_branch: table.j0(),
    };
    write_bytes(&out_file(cfg, BASELINE_TRAJECTORY_FILE), &csv_bytes(|b| run.log.write_csv(b))?)?;
    write_bytes(&out_file(cfg, BASELINE_FILE), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok((run, summary))
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub table: TableAudit,
    pub bad_cells: Vec<(usize, usize, i32)>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.table.is_clean() && self.bad_cells.is_empty()
    }
}

/// Check the persisted artifacts: hashes, every atlas cell against forward
/// kinematics, and the table against a fresh solve.
pub fn run_verify(cfg: &ScenarioConfig, pose_tol: f64) -> Result<VerifyReport> {
    let (grid, table, _) = load_plan(cfg)?;
    let sc = cfg.step_constraint(grid.provenance.path.sample_interval());
    Ok(VerifyReport { table: verify_table(&table, &grid, &sc), bad_cells: grid.audit(pose_tol) })
}
