use std::path::Path;
use std::process::{Command, Output};

const ONE_DIM_QP: &str = "conic-problem 1
n 1 m 1
cones 1
nonneg 1
P 1
0 0 1.0
q
1.0
A 1
0 0 1.0
b
10.0
optimal -0.5
end
";

// two constraints x <= -1 and -x <= -1
const INFEASIBLE: &str = "conic-problem 1
n 1 m 2
cones 1
nonneg 2
P 0
q
0.0
A 2
0 0 1.0
1 0 -1.0
b
-1.0 -1.0
end
";

// cliques {1,2},{2,9},{4,5,8},{3,6,7,8},{6,7,8,9}
const MERGE_FIXTURE: &str = "9
1 2
2 9
4 5
4 8
5 8
3 6
3 7
3 8
6 7
6 8
7 8
6 9
7 9
8 9
";

fn conic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conic")).args(args).env_remove("CONIC_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_one_dimensional_qp() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "qp.txt", ONE_DIM_QP);
    let json = dir.path().join("out.json");
    let o = conic(&["solve", &file, "-q", "--eps-abs", "1e-8", "--eps-rel", "1e-8", "--json-out", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("status      Solved"), "{out}");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(doc["status"], "Solved");
    assert!((doc["objective"].as_f64().unwrap() + 0.5).abs() < 1e-5);
    assert!((doc["x"][0].as_f64().unwrap() + 1.0).abs() < 1e-4);
}

#[test]
fn infeasible_problem_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "inf.txt", INFEASIBLE);
    let o = conic(&["solve", &file, "-q"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("PrimalInfeasible"));
}

#[test]
fn iteration_limit_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ba.txt");
    let g = conic(&["generate", "block-arrow", file.to_str().unwrap(), "--size", "3", "--seed", "4"]);
    assert_eq!(g.status.code(), Some(0));
    let o = conic(&["solve", file.to_str().unwrap(), "-q", "--max-iter", "3", "--eps-abs", "1e-12", "--eps-rel", "1e-12"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn usage_and_io_errors_exit_with_one() {
    assert_eq!(conic(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(conic(&["solve", "/nonexistent/problem.txt"]).status.code(), Some(1));
    assert_eq!(conic(&["solve", "x", "--merge", "bogus"]).status.code(), Some(1));
    assert_eq!(conic(&["--help"]).status.code(), Some(0));
}

#[test]
fn analyze_logs_single_merge() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "pattern.txt", MERGE_FIXTURE);
    let o = conic(&["analyze", &file, "--merge", "clique-graph"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let merges: Vec<&str> = out.lines().filter(|l| l.starts_with("merge ")).collect();
    assert_eq!(merges.len(), 1, "{out}");
    assert!(merges[0].contains("{3,6,7,8} + {6,7,8,9}") && merges[0].contains("weight 3"), "{out}");
    assert!(out.contains("cliques         5"));
    assert!(out.contains("merged cliques  4"));

    let none = stdout(&conic(&["analyze", &file, "--merge", "none"]));
    assert!(none.contains("merged cliques  5"));
}

#[test]
fn bench_over_generated_problems() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, name) in [("random-qp", "a.txt"), ("nearest-corr", "b.txt"), ("block-arrow", "c.txt")] {
        let p = dir.path().join(name);
        let g = conic(&["generate", kind, p.to_str().unwrap(), "--size", "4", "--seed", "1"]);
        assert_eq!(g.status.code(), Some(0));
    }
    let o = conic(&["bench", dir.path().to_str().unwrap(), "--cap", "30", "--eps", "1e-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut sections = out.split("\n\n");
    let rows: Vec<&str> = sections.next().unwrap().lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    for problem in ["a.txt", "b.txt", "c.txt"] {
        for strategy in ["NoDe", "NoMer", "ParCh", "CG"] {
            assert!(rows.iter().any(|r| r.starts_with(&format!("{problem}\t{strategy}\tSolved"))), "{out}");
        }
    }
    let aggregates: Vec<&str> = sections.next().unwrap().lines().skip(1).collect();
    assert_eq!(aggregates.len(), 4);
    let fastest: usize = aggregates.iter().map(|l| l.split('\t').nth(3).unwrap().parse::<usize>().unwrap()).sum();
    assert!(fastest >= 3);
}
