use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrw")).args(args).output().expect("spawn mrw")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn reversal_program() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs/reversal.mrk")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_prints_reversal_trace() {
    let o = mrw(&["run", reversal_program().to_str().unwrap(), "abb", "--trace"]);
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 13);
    assert_eq!(lines[0], "abb -> αabb (by 5)");
    assert_eq!(lines[3], "aαbβab -> abαβbβab (by 1)");
    assert_eq!(lines[10], "abbbbaα -> abbbba (by 4)");
    assert_eq!(lines[11], "status: terminated (11 steps)");
    assert_eq!(lines[12], "abbbba");
}

#[test]
fn run_reports_blocked_and_step_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let swap = write(tmp.path(), "swap.mrk", "alphabet: ab\nab -> ba\n");
    let o = mrw(&["run", &swap, "aabb"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "status: blocked (4 steps)\nbbaa\n");

    let grow = write(tmp.path(), "grow.mrk", "alphabet: a\na -> aa\n");
    let o = mrw(&["run", &grow, "a", "--step-limit", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "status: step_limit (5 steps)\naaaaaa\n");
}

#[test]
fn run_rejects_bad_programs_and_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.mrk", "alphabet: ab\nab -> bc\n");
    let o = mrw(&["run", &bad, "ab"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"), "{o:?}");

    let o = mrw(&["run", reversal_program().to_str().unwrap(), "abc"]);
    assert!(!o.status.success());
}

const SMALL: &str = "seed = 3\nnum_instructions = 30\nexamples_per_instruction = 20\nnoop_fraction = 0.5\n\
                     occurrence_set = [1, 2]\nholdout_instructions = 5\ntest_examples = 100\n";

fn checksum(o: &Output) -> String {
    stdout(o).lines().find_map(|l| l.strip_prefix("checksum ")).expect("checksum line").to_string()
}

#[test]
fn gen_is_deterministic_and_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let oa = mrw(&["gen", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1", "--verify"]);
    let ob = mrw(&["gen", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "4"]);
    assert!(oa.status.success() && ob.status.success(), "{oa:?}");
    assert!(stdout(&oa).contains("verified 700 records"));
    assert_eq!(checksum(&oa), checksum(&ob));
    assert_eq!(fs::read(a.join("train.jsonl")).unwrap(), fs::read(b.join("train.jsonl")).unwrap());

    let c = tmp.path().join("c");
    let oc = mrw(&["gen", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "4"]);
    assert!(oc.status.success());
    assert_ne!(checksum(&oa), checksum(&oc));
}

#[test]
fn gen_config_errors_leave_no_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for (text, needle) in [
        ("num_instructions = 3\nexamples_per_instruction = 2\n", "seed"),
        ("seed = 1\nnum_instructions = 3\nexamples_per_instruction = 2\ncolour = 1\n", "colour"),
        ("seed = 1\nnum_instructions = 3\nexamples_per_instruction = 2\npattern_length = 60\n", "pattern_length"),
    ] {
        let cfg = write(tmp.path(), "c.toml", text);
        let o = mrw(&["gen", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(!o.status.success());
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{err}");
        assert!(!out.join("train.jsonl").exists());
    }
}

#[test]
fn eval_scores_baselines_and_builds_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let cfg = write(t, "c.toml", SMALL);
    let data = t.join("d");
    assert!(mrw(&["gen", "--config", &cfg, "--out", data.to_str().unwrap()]).status.success());
    let reference = data.join("test.jsonl");
    let reference = reference.to_str().unwrap();
    let path = |n: &str| t.join(n).to_str().unwrap().to_string();

    for (baseline, preds) in [("target", "p.jsonl"), ("copy", "c.jsonl")] {
        let o = mrw(&["eval", "--reference", reference, "--baseline", baseline, "--out", &path(preds)]);
        assert!(o.status.success(), "{o:?}");
    }
    let o = mrw(&[
        "eval", "--reference", reference, "--predictions", &path("p.jsonl"), "--out", &path("r1.json"),
        "--num-instructions", "30", "--text", &path("r1.txt"),
    ]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(path("r1.json")).unwrap()).unwrap();
    assert_eq!(report["total_accuracy"], 1.0);
    assert!(fs::read_to_string(path("r1.txt")).unwrap().contains("total accuracy  1.0000"));

    let o = mrw(&[
        "eval", "--reference", reference, "--predictions", &path("c.jsonl"), "--out", &path("r2.json"),
        "--num-instructions", "10",
    ]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(path("r2.json")).unwrap()).unwrap();
    assert_eq!(report["total_accuracy"], 0.5);
    assert_eq!(report["hasop_accuracy"], 0.0);
    assert_eq!(report["noop_accuracy"], 1.0);

    let o = mrw(&["curve", "--reports", &path("r1.json"), &path("r2.json"), "--out", &path("curve.csv")]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(
        fs::read_to_string(path("curve.csv")).unwrap(),
        "num_instructions,total,hasop,noop\n10,0.5,0,1\n30,1,1,1\n"
    );
}

#[test]
fn eval_rejects_mismatched_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let reference = write(
        t,
        "ref.jsonl",
        "{\"pattern\":\"ab\",\"replacement\":\"c\",\"input\":\"xab\",\"target\":\"xc\",\"is_noop\":false,\"occurrences\":1}\n",
    );
    let preds = write(t, "p.jsonl", "{\"example_id\":0,\"prediction\":\"xc\"}\n{\"example_id\":0,\"prediction\":\"xc\"}\n");
    let out = t.join("r.json");
    let o = mrw(&["eval", "--reference", &reference, "--predictions", &preds, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn cipher_gen_honors_noop_share() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    write(t, "train.txt", "ship\nboat\ncar\nplane\ntrain\n");
    write(t, "test.txt", "horse\ncamel\nmule\n");
    let cfg = write(
        t,
        "c.toml",
        "kind = \"cipher\"\nseed = 9\ntrain_size = 1000\ntest_size = 200\n\
         train_dictionary = \"train.txt\"\ntest_dictionary = \"test.txt\"\n",
    );
    let out = t.join("out");
    let o = mrw(&["cipher-gen", "--config", &cfg, "--out", out.to_str().unwrap(), "--verify"]);
    assert!(o.status.success(), "{o:?}");
    let noops = fs::read_to_string(out.join("train.jsonl")).unwrap().matches("\"is_noop\":true").count();
    assert_eq!(noops, 400);

    let rewrite = write(t, "r.toml", SMALL);
    assert!(!mrw(&["cipher-gen", "--config", &rewrite, "--out", out.to_str().unwrap()]).status.success());
}
