use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn fixture(rel: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", rel]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_safeplan"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const BW: &str = "domains/blocksworld.pddl";
const BW_APPX: &str = "problems/blocksworld-example.pddl";

const FIXTURES: [(&str, &str); 4] = [
    (
        "domains/blocksworld.pddl",
        "problems/blocksworld-example.pddl",
    ),
    ("domains/ferry.pddl", "problems/ferry-example.pddl"),
    ("domains/grippers.pddl", "problems/grippers-example.pddl"),
    ("domains/spanner.pddl", "problems/spanner-example.pddl"),
];

#[test]
fn plan_validate_reward_pipeline_on_every_fixture() {
    for (d, p) in FIXTURES {
        let plan = run(&["plan", &fixture(d), &fixture(p)]);
        assert_eq!(plan.status.code(), Some(0), "{p}");
        let l_ref = stdout(&plan).lines().count();
        let validated = run_stdin(&["validate", &fixture(d), &fixture(p), "-"], &stdout(&plan));
        assert_eq!(
            validated.status.code(),
            Some(0),
            "{p}: {}",
            stdout(&validated)
        );
        assert_eq!(stdout(&validated).lines().next(), Some("c5"));
        let reward = run_stdin(
            &["reward", "-", "--l-ref", &l_ref.to_string()],
            &stdout(&validated),
        );
        assert_eq!(reward.status.code(), Some(0));
        assert_eq!(stdout(&reward).lines().next(), Some("1"));
    }
}

#[test]
fn blind_plan_violates_the_constraint() {
    let plan = run(&["plan", "--blind", &fixture(BW), &fixture(BW_APPX)]);
    assert_eq!(plan.status.code(), Some(0));
    let v = run_stdin(
        &["validate", &fixture(BW), &fixture(BW_APPX), "-"],
        &stdout(&plan),
    );
    assert_eq!(v.status.code(), Some(12));
    assert!(stdout(&v).starts_with("c2\n"));
}

#[test]
fn exit_codes_follow_categories() {
    let cases = [
        ("(fly b1 b2)\n", 11),
        ("(pick-up b4)\n(put-down b4)\n(pick-up b2)\n", 13),
        ("(pick-up b4)\n(put-down b4)\n", 14),
    ];
    for (plan, code) in cases {
        let o = run_stdin(&["validate", &fixture(BW), &fixture(BW_APPX), "-"], plan);
        assert_eq!(o.status.code(), Some(code), "{plan}: {}", stdout(&o));
    }
}

#[test]
fn c4_report_rewards_minus_point_three() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let report_json = r#"{"category":"c4","t_v":null,"failed_action_index":null,"n_sat":1,"n_total":3,
        "executed_steps":2,"message":"Goal not satisfied"}"#;
    std::fs::write(&report, report_json).unwrap();
    let o = run(&["reward", report.to_str().unwrap(), "--l-ref", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("-0.3"));

    let o = run(&["reward", report.to_str().unwrap(), "--l-ref", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() + 0.3).abs() < 1e-12);
    assert_eq!(v["category"], "c4");

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[c3]\nlower = -0.6\nupper = 0.5\n").unwrap();
    let o = run(&[
        "reward",
        report.to_str().unwrap(),
        "--l-ref",
        "4",
        "--config",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run_stdin(
        &[
            "validate",
            &fixture(BW),
            &fixture(BW_APPX),
            "-",
            "--report",
            out.to_str().unwrap(),
        ],
        "(unstack b2 b1)\n(put-down b2)\n",
    );
    assert_eq!(o.status.code(), Some(12));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let text = stdout(&o);
    let printed: serde_json::Value =
        serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert_eq!(file, printed);
    assert_eq!(file["t_v"], 2);
    for key in [
        "category",
        "t_v",
        "failed_action_index",
        "n_sat",
        "n_total",
        "executed_steps",
        "message",
    ] {
        assert!(file.get(key).is_some(), "{key}");
    }
}

#[test]
fn parse_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.pddl");
    std::fs::write(&broken, "(define (problem x").unwrap();
    let o = run_stdin(
        &["validate", &fixture(BW), broken.to_str().unwrap(), "-"],
        "",
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["validate"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn advantages_are_centered() {
    let o = run_stdin(&["advantages", "-"], "1 -1\n0.5 -0.5\n");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n-1\n0.5\n-0.5\n");
    assert_eq!(run_stdin(&["advantages", "-"], "").status.code(), Some(2));
}

#[test]
fn convert_to_json_and_back() {
    let json = run(&["convert", &fixture(BW_APPX), "--to", "json"]);
    assert_eq!(json.status.code(), Some(0));
    assert!(stdout(&json).contains("\"sometime_before\""));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, stdout(&json)).unwrap();
    let pddl = run(&["convert", path.to_str().unwrap(), "--to", "pddl3"]);
    assert!(stdout(&pddl).contains("(sometime-before (on-table b2) (on-table b1))"));
    let nl = run(&["convert", &fixture(BW_APPX), "--to", "nl"]);
    assert!(stdout(&nl).contains("must be true at some point."));
    // JSON input validates like the PDDL it came from.
    let plan = run(&["plan", &fixture(BW), path.to_str().unwrap()]);
    let v = run_stdin(
        &["validate", &fixture(BW), path.to_str().unwrap(), "-"],
        &stdout(&plan),
    );
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn gen_dataset_and_curriculum() {
    let dir = tempfile::tempdir().unwrap();
    let pool = dir.path().join("pool");
    let o = run(&[
        "gen",
        "ferry",
        "--size",
        "l=3,c=2",
        "--seed",
        "4",
        "--count",
        "6",
        "--out",
        pool.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let manifest = pool.join("pool.json");
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    let problems = m["problems"].as_array().unwrap();
    assert_eq!(problems.len(), 6);
    for key in [
        "id",
        "params",
        "seed",
        "signature",
        "l_ref",
        "plan_path",
        "problem_path",
    ] {
        assert!(problems[0].get(key).is_some(), "{key}");
    }

    let ds = dir.path().join("ds");
    let o = run(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        "--formats",
        "pddl3,json",
        "--scale",
        "0.004",
        "--seed",
        "1",
        "--out",
        ds.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let dm: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ds.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(dm["records"].as_array().unwrap().len(), 2 * (2 + 2));

    let o = run(&[
        "build-dataset",
        manifest.to_str().unwrap(),
        "--scale",
        "1",
        "--out",
        ds.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&[
        "curriculum",
        "sample",
        "--pool",
        manifest.to_str().unwrap(),
        "--step",
        "0",
        "--total",
        "10",
        "--seed",
        "3",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let batch: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(batch["phase"], "early");
    assert!(!batch["items"].as_array().unwrap().is_empty());

    let o = run(&[
        "gen",
        "ferry",
        "--size",
        "l=9,c=2",
        "--count",
        "1",
        "--out",
        pool.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn infeasible_plan_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("contra.pddl");
    std::fs::write(
        &p,
        "(define (problem contra) (:domain blocksworld) (:objects b1 b2 b3 - block)
          (:init (on b1 b3) (on b2 b1) (on-table b3) (clear b2) (handempty))
          (:goal (and (on-table b1) (on-table b2)))
          (:constraints (and (sometime-before (on-table b1) (on-table b2))
                             (sometime-before (on-table b2) (on-table b1)))))",
    )
    .unwrap();
    assert_eq!(
        run(&["plan", &fixture(BW), p.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}
