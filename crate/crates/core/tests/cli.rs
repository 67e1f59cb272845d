use std::path::{Path, PathBuf};

use actorcps::bench::{DEADLOCK, MAPREDUCE};
use actorcps::cli::{self, EXIT_DEADLOCK, EXIT_FUEL, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use actorcps::trace::{read_jsonl, Rule};

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Out {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["actorcps"];
    full.extend_from_slice(args);
    let code = cli::main(full, &mut out, &mut err);
    Out { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_mapreduce_under_both_semantics() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "mr.act", MAPREDUCE);
    for sem in ["rt", "source"] {
        let o = run(&["run", s(&f), "--sem", sem]);
        assert_eq!(o.code, EXIT_OK, "{sem}: {}", o.stderr);
        assert!(o.stdout.starts_with("Finished after"), "{}", o.stdout);
        assert!(o.stdout.contains(" r=42"), "{}", o.stdout);
    }
}

#[test]
fn deadlock_and_fuel_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = write(dir.path(), "d.act", DEADLOCK);
    assert_eq!(run(&["run", s(&d)]).code, EXIT_DEADLOCK);
    assert_eq!(run(&["run", s(&d), "--sem", "source", "--scheduler", "random", "--seed", "3"]).code, EXIT_DEADLOCK);
    let spin = write(dir.path(), "spin.act", "main() { x := 1; while (x == 1) { skip; } }");
    assert_eq!(run(&["run", s(&spin), "--fuel", "50"]).code, EXIT_FUEL);
    assert_eq!(run(&["run", s(&spin), "--sem", "source", "--fuel", "50"]).code, EXIT_FUEL);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.act", "main() { x := ; }");
    let o = run(&["run", s(&bad)]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("bad.act"), "{}", o.stderr);
    assert_eq!(run(&["run", "/nonexistent/file.act"]).code, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(run(&["bench", "nope", "--n", "3"]).code, EXIT_USAGE);
    assert_eq!(run(&["bench", "logs"]).code, EXIT_USAGE);
    let mr = write(dir.path(), "mr.act", MAPREDUCE);
    assert_eq!(run(&["run", s(&mr), "--scheduler", "random"]).code, EXIT_USAGE);
    assert_eq!(run(&["cost", s(&mr), "--model", "bogus"]).code, EXIT_USAGE);
}

#[test]
fn runtime_error_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "div.act", "main() { x := 0; y := 5 / x; }");
    let o = run(&["run", s(&f), "--sem", "source"]);
    assert_eq!(o.code, EXIT_VIOLATION, "{}", o.stderr);
    assert_eq!(run(&["run", s(&f)]).code, EXIT_VIOLATION);
}

#[test]
fn trace_file_schema() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "mr.act", MAPREDUCE);
    let t = dir.path().join("t.jsonl");
    assert_eq!(run(&["run", s(&f), "--trace", s(&t)]).code, EXIT_OK);
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'));
    for (i, line) in text.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 5, "{line}");
        assert_eq!(v["i"], i);
        assert!(v["obj"].is_u64() && v["rule"].is_string() && v["stmt"].is_string());
        let is_async = v["rule"] == "Async";
        assert_eq!(!v["spawn"].is_null(), is_async, "{line}");
    }
    let steps = read_jsonl(&text).unwrap();
    assert_eq!(steps.iter().filter(|s| s.rule == Rule::Async).count(), 2);
    let first = &steps[0];
    assert_eq!((first.object, first.rule, first.stmt.as_str()), (0, Rule::New, "node1 := new;"));
}

#[test]
fn source_runs_are_reproducible_by_seed() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "mr.act", MAPREDUCE);
    let trace = |seed: &str, name: &str| {
        let t = dir.path().join(name);
        let o = run(&["run", s(&f), "--sem", "source", "--scheduler", "random", "--seed", seed, "--trace", s(&t)]);
        assert_eq!(o.code, EXIT_OK);
        std::fs::read(&t).unwrap()
    };
    assert_eq!(trace("11", "a"), trace("11", "b"));
}

#[test]
fn scripted_scheduler() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "mr.act", MAPREDUCE);
    let rt_trace = dir.path().join("rt.jsonl");
    assert_eq!(run(&["run", s(&f), "--trace", s(&rt_trace)]).code, EXIT_OK);
    let objects: Vec<String> = read_jsonl(&std::fs::read_to_string(&rt_trace).unwrap())
        .unwrap()
        .iter()
        .map(|s| s.object.to_string())
        .collect();
    let script = write(dir.path(), "script.txt", &objects.join("\n"));
    let src_trace = dir.path().join("src.jsonl");
    let sched = format!("script:{}", s(&script));
    let o = run(&["run", s(&f), "--sem", "source", "--scheduler", &sched, "--trace", s(&src_trace)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(std::fs::read(&rt_trace).unwrap(), std::fs::read(&src_trace).unwrap());
}

#[test]
fn compile_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "mr.act", MAPREDUCE);
    let o = run(&["compile", s(&f)]);
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(o.stdout.trim(), "3 methods, 10 attributes");
    let o = run(&["compile", s(&f), "--dump"]);
    assert!(o.stdout.starts_with("(layout (node1 0)"), "{}", o.stdout);
    assert!(o.stdout.contains("(method map 1 "), "{}", o.stdout);
    let o = run(&["check", s(&f)]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.starts_with("OK 0 0 New\n"));
    assert!(o.stdout.ends_with("SOUND 19 steps\n"), "{}", o.stdout);
}

#[test]
fn cost_with_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "mr.act", MAPREDUCE);
    let o = run(&["cost", s(&f), "--per-object"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("object 2: 2\n") && o.stdout.contains("total 19\n"), "{}", o.stdout);
    assert!(o.stdout.ends_with("preserved\n"));
    let m = write(dir.path(), "m.txt", "halves\n*=0\nAsync=1/2\nNew=3\n");
    let o = run(&["cost", s(&f), "--model-file", s(&m)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.starts_with("model halves\ntotal 7\n"), "{}", o.stdout);
    let broken = write(dir.path(), "b.txt", "x\nAssign=1\n");
    assert_eq!(run(&["cost", s(&f), "--model-file", s(&broken)]).code, EXIT_USAGE);
}

#[test]
fn bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    assert_eq!(run(&["bench", "primes_range", "--sweep", "5,10", "--csv", s(&out)]).code, EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,n,steps,wall_nanos");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("primes_range,5,"));
    let o = run(&["bench", "mapreduce", "--n", "1"]);
    assert!(o.stdout.contains("mapreduce,1,19,"), "{}", o.stdout);
}

#[test]
fn bounds_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "mr.act", MAPREDUCE);
    let ok = write(dir.path(), "ok.csv", "program,n,object,bound\nmr,0,0,15\nmr,0,2,2\nlogs,4,0,1000\n");
    let o = run(&["bounds", s(&f), "--bounds", s(&ok)]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
    assert_eq!(o.stdout.matches(" OK").count(), 3);
    let tight = write(dir.path(), "tight.csv", "program,n,object,bound\nmr,0,0,14\n");
    let o = run(&["bounds", s(&f), "--bounds", s(&tight)]);
    assert_eq!(o.code, EXIT_VIOLATION);
    assert!(o.stdout.contains("cost 15 bound 14 VIOLATED"), "{}", o.stdout);
}
