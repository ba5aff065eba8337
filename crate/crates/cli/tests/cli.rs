use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn crr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crr"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn summary_value(text: &str, key: &str) -> f64 {
    let prefix = format!("# {key} ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .parse()
        .unwrap()
}

fn allocation_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn four_agents() -> String {
    data("four_agents.txt").to_string_lossy().into_owned()
}

#[test]
fn solve_um_crr_reproduces_trace() {
    let text = stdout(&crr(&["solve", &four_agents(), "--goal", "um-crr"]));
    assert_eq!(
        allocation_lines(&text),
        ["0: 0 2 4", "1: 0 2 5", "2: 1 3 5", "3: 1 3 4"]
    );
    assert_eq!(summary_value(&text, "welfare"), 45.0);
    assert_eq!(summary_value(&text, "EF1"), 1.0);

    let trace = stdout(&crr(&["trace", &four_agents(), "--goal", "um-crr"]));
    let first: Vec<_> = trace.lines().take(4).collect();
    assert_eq!(
        first,
        ["PICK 0 0 1", "PICK 1 0 1", "PICK 2 1 1", "PICK 3 1 1"]
    );
}

#[test]
fn null_goal_is_round_robin() {
    let text = stdout(&crr(&["solve", &four_agents(), "--goal", "null"]));
    // every agent takes its favourite remaining item in index order
    assert_eq!(
        allocation_lines(&text),
        ["0: 0 2 4", "1: 0 2 4", "2: 1 3 5", "3: 1 3 5"]
    );
}

#[test]
fn threshold_goal_meets_threshold() {
    let text = stdout(&crr(&[
        "solve",
        &four_agents(),
        "--goal",
        "um-threshold:40",
    ]));
    assert!(summary_value(&text, "welfare") >= 40.0);
    let out = crr(&["solve", &four_agents(), "--goal", "um-threshold:46"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_reports_one_sided_ef1() {
    let dir = tempfile::tempdir().unwrap();
    let alloc = dir.path().join("alloc.txt");
    fs::write(&alloc, "0: c d\n1: a b\n").unwrap();
    let report = dir.path().join("report.csv");
    let text = stdout(&crr(&[
        "evaluate",
        data("two_agents.txt").to_str().unwrap(),
        alloc.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]));
    assert!(text.contains("two_agents,given,EF1,0.5\n"), "{text}");
    assert_eq!(fs::read_to_string(report).unwrap(), text);
}

#[test]
fn evaluate_rejects_bad_allocations() {
    let dir = tempfile::tempdir().unwrap();
    let instance = data("two_agents.txt");
    for bad in ["0: 2 3\n1:\n", "0: 2 3\n1: 0 9\n", "0: 0 1\n1: 1 2\n"] {
        let alloc = dir.path().join("alloc.txt");
        fs::write(&alloc, bad).unwrap();
        let out = crr(&[
            "evaluate",
            instance.to_str().unwrap(),
            alloc.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("error["), "{err}");
    }
}

#[test]
fn solve_output_evaluates_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for goal in ["um", "rm", "rm-crr", "nash", "egal", "lsowa", "lsowa-crr"] {
        let alloc = dir.path().join(format!("{goal}.txt"));
        stdout(&crr(&[
            "solve",
            &four_agents(),
            "--goal",
            goal,
            "--out",
            alloc.to_str().unwrap(),
        ]));
        let text = stdout(&crr(&[
            "evaluate",
            &four_agents(),
            alloc.to_str().unwrap(),
            "--objective",
            goal,
        ]));
        assert_eq!(text.lines().count(), 6, "{goal}: {text}");
    }
}

#[test]
fn generate_phi_zero_gives_identical_rankings() {
    let text = stdout(&crr(&[
        "generate",
        "--mallows",
        "phi=0",
        "n=2",
        "m=3",
        "seed=7",
    ]));
    let prefs: Vec<_> = text
        .lines()
        .filter_map(|l| l.strip_prefix("pref "))
        .map(|l| l.split_once(": ").unwrap().1)
        .collect();
    assert_eq!(prefs.len(), 2);
    assert_eq!(prefs[0], prefs[1]);

    let again = stdout(&crr(&[
        "generate",
        "--mallows",
        "phi=0",
        "n=2",
        "m=3",
        "seed=7",
    ]));
    assert_eq!(text, again);
}

#[test]
fn generate_converts_preflib() {
    let dir = tempfile::tempdir().unwrap();
    let soi = dir.path().join("votes.soi");
    fs::write(&soi, "# NUMBER ALTERNATIVES: 3\n2: 2,1\n1: 3,{1,2}\n").unwrap();
    let text = stdout(&crr(&["generate", "--preflib", soi.to_str().unwrap()]));
    assert!(text.contains("agents 3\n"), "{text}");
    assert!(text.contains("pref 0: 1,0,2\n"), "{text}");
    assert!(text.contains("pref 2: 2,{0,1}\n"), "{text}");
}

const SWEEP: &str = r#"
n = 3
m = 6
agent_caps = [1, 3]
item_caps = [1, 1]
phis = [0.0, 0.5]
trials = 2
objectives = ["UM", "UM-CRR", "RM-CRR", "Nash"]
seed = 5
"#;

#[test]
fn experiment_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    fs::write(&config, SWEEP).unwrap();
    let run = |out: &str, jobs: &str| {
        let out = dir.path().join(out);
        stdout(&crr(&[
            "experiment",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            jobs,
        ]));
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "2");
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 4);
    let summary = fs::read_to_string(dir.path().join("a.summary.csv")).unwrap();
    assert!(summary.starts_with("phi,objective,notion,mean,std,runs\n"));
}

#[test]
fn experiment_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    for bad in [
        SWEEP.replace("trials = 2", "trials = \"x\""),
        SWEEP.replace("\"Nash\"", "\"Borda\""),
        SWEEP.replace("phis = [0.0, 0.5]", "phis = [2.0]"),
        format!("{SWEEP}colour = 1\n"),
    ] {
        fs::write(&config, &bad).unwrap();
        let out = crr(&["experiment", config.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[config]"));
    }
}

#[test]
fn parse_errors_and_budget_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.txt");
    fs::write(&broken, "agents 2\nitems x\n").unwrap();
    let out = crr(&["solve", broken.to_str().unwrap(), "--goal", "um"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[parse]"));

    let out = crr(&[
        "solve",
        &four_agents(),
        "--goal",
        "nash",
        "--bnb-budget",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[budget]"));

    let out = crr(&["solve", "/nonexistent/file.txt", "--goal", "um"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn share_weights_are_validated() {
    let text = stdout(&crr(&[
        "solve",
        &four_agents(),
        "--goal",
        "null",
        "--share-weights",
        "1,1,1,1",
    ]));
    assert_eq!(allocation_lines(&text).len(), 4);
    let out = crr(&[
        "solve",
        &four_agents(),
        "--goal",
        "null",
        "--share-weights",
        "1,-1,1,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = crr(&[
        "solve",
        &four_agents(),
        "--goal",
        "um",
        "--share-weights",
        "1,1,1,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
