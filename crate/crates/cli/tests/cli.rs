use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pbsgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbsgraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const STAR4: &str = "vertices 4\n0 1\n0 2\n0 3\n";
const PATH4: &str = "vertices 4\n0 1\n1 2\n2 3\n";

#[test]
fn analyze_headline() {
    let o = pbsgraph(&[
        "analyze",
        "--eta-s",
        "0.01",
        "--eta-d",
        "0.7",
        "--m",
        "7",
        "--rep-rate-hz",
        "80e6",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("T_approx/t0 = 1.78336e+08"), "{text}");
    assert!(text.contains("T_approx = 2.2292 s"), "{text}");
}

#[test]
fn analyze_naive_and_trivial() {
    let o = pbsgraph(&[
        "analyze", "--naive", "--n", "128", "--eta-s", "0.01", "--eta-d", "0.7",
    ]);
    assert!(stdout(&o).contains("log10(T/t0) = 166.792"));
    let o = pbsgraph(&["analyze", "--eta-s", "1", "--eta-d", "1", "--m", "1"]);
    assert!(stdout(&o).contains("T_exact/t0 = 1\n"));
}

#[test]
fn analyze_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("table.csv");
    let o = pbsgraph(&["analyze", "--m", "7", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "m,n,a_m,p_m,T_exact_over_t0,T_approx_over_t0,naive_log10_T_over_t0"
    );
    assert_eq!(lines.len(), 8);
    assert!(lines[7].starts_with("7,128,"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        pbsgraph(&["analyze", "--eta-s", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pbsgraph(&["analyze", "--naive", "--n", "7"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pbsgraph(&["simulate", "--trials", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(pbsgraph(&["frobnicate"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.txt", "PAIR 0\n");
    assert_eq!(pbsgraph(&["verify", &bad]).status.code(), Some(2));
    let bad_graph = write(dir.path(), "bad.graph", "vertices 2\n0 5\n");
    assert_eq!(pbsgraph(&["plan", &bad_graph]).status.code(), Some(2));
}

#[test]
fn unwritable_output_fails() {
    let o = pbsgraph(&["analyze", "--csv", "/nonexistent/dir/table.csv"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn plan_star_and_path() {
    let dir = TempDir::new().unwrap();
    let star = write(dir.path(), "star.txt", STAR4);
    let o = pbsgraph(&["plan", &star]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PAIR")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.starts_with("PBS")).count(), 1);

    let path = write(dir.path(), "path.txt", PATH4);
    let o = pbsgraph(&["plan", &path]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("unreachable by joins"));
}

#[test]
fn plan_protocol_and_dot() {
    let dir = TempDir::new().unwrap();
    let dot = dir.path().join("p.dot");
    let o = pbsgraph(&[
        "plan",
        "--protocol",
        "--m",
        "2",
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PAIR")).count(), 4);
    assert_eq!(text.lines().filter(|l| l.starts_with("PBS")).count(), 3);
    let dot = fs::read_to_string(dot).unwrap();
    assert!(dot.starts_with("graph protocol {"));
    assert_eq!(dot.matches(" -- ").count(), 7);
}

#[test]
fn plan_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let targets = [
        STAR4,
        "vertices 6\n0 1\n1 2\n1 3\n3 4\n3 5\n",
        "vertices 8\n0 1\n0 2\n0 3\n0 4\n0 5\n4 6\n4 7\n",
    ];
    for (k, t) in targets.iter().enumerate() {
        let target = write(dir.path(), &format!("t{k}.txt"), t);
        for json in [false, true] {
            let sched = dir.path().join(format!("t{k}-{json}.sched"));
            let mut args = vec!["plan", &target, "--out", sched.to_str().unwrap()];
            if json {
                args.push("--json");
            }
            assert_eq!(pbsgraph(&args).status.code(), Some(0), "{t}");
            let o = pbsgraph(&[
                "verify",
                sched.to_str().unwrap(),
                "--target",
                &target,
                "--oracle",
            ]);
            let text = stdout(&o);
            assert_eq!(o.status.code(), Some(0), "{text}");
            assert!(text.contains("target: match"), "{text}");
            assert!(
                text.contains("oracle fidelity: 1\n")
                    || text.contains("oracle fidelity: 0.99999999"),
                "{text}"
            );
        }
    }
}

#[test]
fn plan_search_finds_loop() {
    let dir = TempDir::new().unwrap();
    let target = write(
        dir.path(),
        "loop.txt",
        "vertices 6\n0 1\n0 2\n1 2\n0 3\n1 5\n2 4\n",
    );
    assert_eq!(pbsgraph(&["plan", &target]).status.code(), Some(2));
    let o = pbsgraph(&[
        "plan",
        &target,
        "--search",
        "--allow-intra",
        "--max-ops",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let sched = write(
        dir.path(),
        "loop.sched",
        &stdout(&o).lines().skip(1).collect::<Vec<_>>().join("\n"),
    );
    let o = pbsgraph(&["verify", &sched, "--target", &target, "--oracle"]);
    assert!(stdout(&o).contains("target: match"), "{}", stdout(&o));
    assert!(stdout(&o).contains("1 intra"));
}

#[test]
fn verify_reports_probability() {
    let dir = TempDir::new().unwrap();
    let star = write(dir.path(), "star.sched", "PAIR 0 1\nPAIR 2 3\nPBS 0 2\n");
    let text = stdout(&pbsgraph(&["verify", &star, "--oracle"]));
    assert!(text.contains("probability: 0.5\n"));
    assert!(text.contains("graph: 0-1 0-2 0-3"));
    assert!(text.contains("oracle probability: 0.5\n"));

    let chain = write(
        dir.path(),
        "chain.sched",
        "PAIR 0 1\nPAIR 2 3\nPAIR 4 5\nPAIR 6 7\nPBS 1 2\nPBS 3 4\nPBS 5 6\n",
    );
    assert!(stdout(&pbsgraph(&["verify", &chain])).contains("probability: 0.125\n"));

    let empty = write(dir.path(), "empty.sched", "# nothing\n");
    let text = stdout(&pbsgraph(&["verify", &empty]));
    assert!(text.contains("probability: 1\n"));
    assert!(text.contains("graph: (no edges)"));

    let o = pbsgraph(&[
        "verify",
        &star,
        "--target",
        &write(dir.path(), "p.txt", PATH4),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_and_configurable() {
    let dir = TempDir::new().unwrap();
    let args = [
        "simulate",
        "--m",
        "3",
        "--trials",
        "300",
        "--seed",
        "5",
        "--no-timestamp",
    ];
    let a = stdout(&pbsgraph(&args));
    let b = stdout(&pbsgraph(&[&args[..], &["--threads", "3"]].concat()));
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(doc["seed"], 5);
    assert_eq!(doc["per_level"].as_array().unwrap().len(), 3);
    assert!(doc["analytic"]["T_exact_log10"].is_f64());
    assert!(doc.get("generated_at").is_none());

    let config = write(
        dir.path(),
        "run.cfg",
        "# campaign\nm = 3\ntrials = 300\nseed = 5\nno_timestamp = true\nthreads = 2\n",
    );
    assert_eq!(stdout(&pbsgraph(&["simulate", "--config", &config])), a);
    let overridden = stdout(&pbsgraph(&["simulate", "--config", &config, "--seed", "6"]));
    assert_ne!(overridden, a);
    assert!(overridden.contains("\"seed\": 6"));

    let stamped = stdout(&pbsgraph(&["simulate", "--m", "2", "--trials", "10"]));
    assert!(stamped.contains("generated_at"));
}

#[test]
fn simulate_dark_counts_and_budget() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("dark.json");
    let o = pbsgraph(&[
        "simulate",
        "--m",
        "2",
        "--eta-s",
        "0.01",
        "--trials",
        "200",
        "--dark",
        "1e-3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert!(doc["per_level"][0]["a_hat"].as_f64().unwrap() < 1.0);

    let o = pbsgraph(&[
        "simulate",
        "--m",
        "3",
        "--trials",
        "1000",
        "--time-budget-secs",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["partial"], true);
}
