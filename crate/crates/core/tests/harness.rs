mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use redres::feasibility::build_grid;
use redres::harness::artifacts::{ATLAS_FILE, TRAJECTORY_FILE};
use redres::harness::audit::desired_poses;
use redres::harness::sim::TRAJECTORY_CSV_HEADER;
use redres::harness::{
    baseline_online, load_plan, run_baseline, run_plan, run_simulation, run_verify, validate_trajectory, PathSource,
    ScenarioConfig, SignalSpec,
};
use redres::kinematics::{forward_kinematics, ik_parameterized, DhModel, JointLimits};
use redres::pathmodel::{circle_path, PathSpec, RedundancyGrid};
use redres::planner::StepConstraint;
use redres::Error;
use tempfile::TempDir;

fn circle_in(dir: &Path) -> ScenarioConfig {
    ScenarioConfig { out: dir.to_path_buf(), ..ScenarioConfig::circle() }
}

#[test]
fn zero_signal_run_is_clean_and_closes_the_loop() {
    let dir = TempDir::new().unwrap();
    let cfg = circle_in(dir.path());
    run_plan(&cfg).unwrap();
    let run = run_simulation(&cfg).unwrap();
    assert!(run.audit.is_clean(), "{:?}", &run.audit.violations[..run.audit.violations.len().min(5)]);
    assert!(run.signal.iter().all(|&c| c == 0));
    for row in run.audit.max_normalized {
        assert!(row.iter().all(|&x| x <= 1.0 + 1e-6));
    }
    // The circle ends where it starts: the last planned joints close it
    // exactly. Stop shaping halts the arm a little short of them, inside the
    // audited tracking error.
    let model = DhModel::panda();
    let start = *circle_path(100, 10.0).unwrap().pose(0);
    let planned = forward_kinematics(&model, &run.log.samples.last().unwrap().q_plan);
    assert!(planned.position_error(&start) < 1e-9 && planned.rotation_error(&start) < 1e-9);
    let end = forward_kinematics(&model, &run.log.last().q);
    assert!(end.position_error(&start) <= run.audit.max_error());
    assert!(run.log.last().qd.amax() <= 0.0075);
}

#[test]
fn tampered_log_is_caught_exactly_once() {
    let dir = TempDir::new().unwrap();
    let cfg = circle_in(dir.path());
    run_plan(&cfg).unwrap();
    let mut log = run_simulation(&cfg).unwrap().log;
    let (r, j) = (0..log.cycles.len())
        .flat_map(|r| (0..7).map(move |j| (r, j)))
        .max_by(|a, b| log.cycles[a.0].qd[a.1].abs().total_cmp(&log.cycles[b.0].qd[b.1].abs()))
        .unwrap();
    log.cycles[r].qd[j] *= 2.0;
    let audit = validate_trajectory(&log, &JointLimits::panda(), &DhModel::panda(), &desired_poses(&log));
    assert_eq!(audit.violation_count(), 1);
    assert_eq!((audit.violations[0].cycle, audit.violations[0].joint), (log.cycles[r].cycle, j + 1));
}

#[test]
fn trajectory_csv_layout() {
    let dir = TempDir::new().unwrap();
    let cfg = circle_in(dir.path());
    run_plan(&cfg).unwrap();
    let run = run_simulation(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join(TRAJECTORY_FILE)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TRAJECTORY_CSV_HEADER);
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), run.log.cycles.len());
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0] as usize, k);
        assert!((row[1] - k as f64 * 0.001).abs() < 1e-9);
    }
    // Sampling point i is reached after i * 100 cycles.
    for s in &run.log.samples {
        let row = run.log.sample_row(s.i).unwrap();
        assert_eq!(row.cycle, s.i * 100);
    }
}

#[test]
fn artifacts_must_match_the_configuration() {
    let dir = TempDir::new().unwrap();
    let cfg = circle_in(dir.path());
    run_plan(&cfg).unwrap();
    assert!(run_verify(&cfg, 1e-9).unwrap().is_clean());

    let mut other = cfg.clone();
    other.grid.y_max = 0.04;
    assert!(matches!(load_plan(&other), Err(Error::ArtifactMismatch { .. })));
    assert!(matches!(run_simulation(&other), Err(Error::ArtifactMismatch { .. })));

    let atlas = dir.path().join(ATLAS_FILE);
    let mut text = fs::read_to_string(&atlas).unwrap();
    text.push('\n');
    fs::write(&atlas, text).unwrap();
    assert!(matches!(load_plan(&cfg), Err(Error::ArtifactMismatch { .. })));
}

#[test]
fn oversized_scripted_step_is_rejected_at_its_index() {
    let dir = TempDir::new().unwrap();
    let mut cfg = circle_in(dir.path());
    let d = run_plan(&cfg).unwrap().summary.d_max;
    let mut c = vec![0; 101];
    c[37] = d + 1;
    for v in c.iter_mut().skip(38) {
        *v = d + 1;
    }
    let file = dir.path().join("signal.csv");
    fs::write(&file, c.iter().map(|v| format!("{v}\n")).collect::<String>()).unwrap();
    cfg.signal = SignalSpec::Scripted { file };
    match run_simulation(&cfg) {
        Err(Error::SignalViolation { index, .. }) => assert_eq!(index, 37),
        other => panic!("expected a signal violation, got {:?}", other.map(|r| r.audit.completed)),
    }
}

#[test]
fn unreachable_path_has_no_feasible_start() {
    let dir = TempDir::new().unwrap();
    let poses = circle_path(4, 0.4)
        .unwrap()
        .poses()
        .iter()
        .map(|&p| {
            let mut p = p;
            p.translation.x += 10.0;
            p
        })
        .collect();
    let path = PathSpec::new(poses, 0.1, 0.001).unwrap();
    let file = dir.path().join("far.csv");
    path.write_csv(fs::File::create(&file).unwrap()).unwrap();
    let cfg = ScenarioConfig { path: PathSource::Csv { file }, ..circle_in(dir.path()) };
    assert!(matches!(run_plan(&cfg), Err(Error::NoFeasibleStart)));
}

#[test]
fn baseline_completes_a_standstill_path() {
    let model = DhModel::panda();
    let limits = JointLimits::panda();
    let p0 = *circle_path(100, 10.0).unwrap().pose(0);
    let path = PathSpec::new(vec![p0, p0], 0.1, 0.001).unwrap();
    let redundancy = RedundancyGrid::spanning(&limits, 61).unwrap();
    let sc = StepConstraint::from_limits(&limits, 0.1, 0.5);
    let reduced = sc.reduced_limits(&limits);
    let q0 = (0..61)
        .filter_map(|j| ik_parameterized(&model, &p0, redundancy.value(j), &limits))
        .find(|q| reduced.within_angles(q))
        .unwrap();
    let run = baseline_online(&model, &path, &redundancy, q0, &limits, &sc, 1e-4);
    assert!(run.completed());
}

#[test]
fn planned_run_completes_where_the_greedy_one_halts() {
    let dir = TempDir::new().unwrap();
    let cfg = circle_in(dir.path());
    run_plan(&cfg).unwrap();
    assert!(run_simulation(&cfg).unwrap().audit.completed);
    let (run, summary) = run_baseline(&cfg).unwrap();
    assert!(!summary.completed);
    let halt = run.halt.unwrap();
    assert_eq!(summary.halt_index, Some(halt.index));
    assert!(halt.index < summary.n);
}

#[test]
fn grid_is_independent_of_thread_count() {
    let cfg = ScenarioConfig { grid: redres::harness::GridParams { m: 21, ..Default::default() }, ..ScenarioConfig::circle() };
    let p = cfg.provenance().unwrap();
    let build = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            build_grid(&p.model, &p.path, &p.redundancy, &p.adjustment, &p.limits, p.singular_tol).unwrap()
        })
    };
    let (a, b) = (build(1), build(4));
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.export_atlas(&mut ca).unwrap();
    b.export_atlas(&mut cb).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(a.provenance.hash(), b.provenance.hash());
}

#[test]
fn configuration_rejects_unknown_fields() {
    assert!(ScenarioConfig::from_json(r#"{"path": {"kind": "circle", "n": 100, "duration": 10.0}}"#).is_ok());
    assert!(ScenarioConfig::from_json(r#"{"path": {"kind": "circle", "n": 100, "duration": 10.0}, "speed": 2}"#).is_err());
    assert!(ScenarioConfig::from_json(r#"{"path": {"kind": "task", "radius": 0.1}}"#).is_err());
    let cfg = ScenarioConfig::task(3);
    assert_eq!(ScenarioConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
}

fn cli(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_redres"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap();
    out.status.code().unwrap()
}

#[test]
fn command_line_exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(cli(d, &["plan"]), 0);
    assert_eq!(cli(d, &["simulate"]), 0);
    assert_eq!(cli(d, &["verify"]), 0);
    assert_eq!(cli(d, &["baseline"]), 0);

    let signal = d.join("signal.csv");
    fs::write(&signal, "0\n".to_string() + &"1\n".repeat(100)).unwrap();
    assert_eq!(cli(d, &["simulate", "--signal-file", signal.to_str().unwrap()]), 3);
    assert_eq!(cli(d, &["verify", "--y-max", "0.04"]), 4);

    let task = TempDir::new().unwrap();
    let config = task.path().join("task.json");
    fs::write(&config, r#"{"path": {"kind": "task"}}"#).unwrap();
    assert_eq!(cli(task.path(), &["plan", "--config", config.to_str().unwrap()]), 2);
}
