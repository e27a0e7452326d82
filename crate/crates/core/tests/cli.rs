//! End-to-end checks of the command-line interface: determinism, the
//! verify/gen/solve round trips, and exit codes.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ndpgrid"))
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    use std::io::Write;
    let mut cmd = bin();
    cmd.args(args);
    if stdin.is_some() {
        cmd.stdin(std::process::Stdio::piped());
    }
    cmd.stdout(std::process::Stdio::piped());
    cmd.stderr(std::process::Stdio::piped());
    let mut child = cmd.spawn().expect("spawn ndpgrid");
    if let Some(text) = stdin {
        child
            .stdin
            .as_mut()
            .unwrap()
            .write_all(text.as_bytes())
            .unwrap();
    }
    child.wait_with_output().expect("wait ndpgrid")
}

#[test]
fn gen_solve_verify_roundtrip() {
    let dir = tempdir();
    let gen = run(
        &[
            "gen",
            "random",
            "--side",
            "24",
            "--k",
            "3",
            "--far-margin",
            "4",
            "--seed",
            "7",
        ],
        None,
    );
    assert!(gen.status.success());
    let inst_text = String::from_utf8(gen.stdout).unwrap();
    let inst_path = dir.join("inst.txt");
    std::fs::write(&inst_path, &inst_text).unwrap();

    let solve = run(&["solve", inst_path.to_str().unwrap(), "--seed", "1"], None);
    assert!(
        solve.status.success(),
        "{}",
        String::from_utf8_lossy(&solve.stderr)
    );
    let out = String::from_utf8(solve.stdout).unwrap();
    assert!(out.contains("verified true"));

    // byte-level determinism under a fixed seed
    let solve2 = run(&["solve", inst_path.to_str().unwrap(), "--seed", "1"], None);
    assert_eq!(out, String::from_utf8(solve2.stdout).unwrap());

    // a different seed still verifies
    let solve3 = run(&["solve", inst_path.to_str().unwrap(), "--seed", "2"], None);
    assert!(solve3.status.success());

    // feed the routing back into verify
    let routing: String = out
        .lines()
        .take_while(|l| !l.starts_with("routed "))
        .map(|l| format!("{l}\n"))
        .collect();
    let routing_path = dir.join("routing.txt");
    std::fs::write(&routing_path, &routing).unwrap();
    let verify = run(
        &[
            "verify",
            inst_path.to_str().unwrap(),
            routing_path.to_str().unwrap(),
        ],
        None,
    );
    assert!(verify.status.success());
    assert_eq!(String::from_utf8(verify.stdout).unwrap().trim(), "valid");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn hard_witness_verifies_end_to_end() {
    let dir = tempdir();
    let gen = run(&["gen", "hard", "--level", "1", "--witness"], None);
    assert!(gen.status.success());
    let text = String::from_utf8(gen.stdout).unwrap();
    let split = text.find("routing v1").expect("witness present");
    let inst_path = dir.join("hard.txt");
    let wit_path = dir.join("wit.txt");
    std::fs::write(&inst_path, &text[..split]).unwrap();
    std::fs::write(&wit_path, &text[split..]).unwrap();
    let verify = run(
        &[
            "verify",
            inst_path.to_str().unwrap(),
            wit_path.to_str().unwrap(),
        ],
        None,
    );
    assert!(verify.status.success());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn verify_rejects_bad_routing_with_exit_1() {
    let dir = tempdir();
    let inst = "ndpgrid v1\nside 3\npairs 1\n1 1 3 3\n";
    let bad = "routing v1\npair 0 len 2\n1 1\n1 2\n";
    let inst_path = dir.join("i.txt");
    let bad_path = dir.join("r.txt");
    std::fs::write(&inst_path, inst).unwrap();
    std::fs::write(&bad_path, bad).unwrap();
    let verify = run(
        &[
            "verify",
            inst_path.to_str().unwrap(),
            bad_path.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(verify.status.code(), Some(1));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempdir();
    let bogus = dir.join("bogus.txt");
    std::fs::write(&bogus, "not an instance\n").unwrap();
    let solve = run(&["solve", bogus.to_str().unwrap()], None);
    assert_eq!(solve.status.code(), Some(2));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn solve_reads_stdin_and_emits_json() {
    let inst = "ndpgrid v1\nside 9\npairs 1\n1 1 5 1\n";
    let solve = run(&["solve", "-", "--format", "json"], Some(inst));
    assert!(solve.status.success());
    let out = String::from_utf8(solve.stdout).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed["routed"], 1);
    assert_eq!(parsed["verified"], true);
}

#[test]
fn solve_wall_smoke() {
    let inst = "ndpgrid v1\ngraph wall\nside 12\npairs 1\n1 3 6 6\n";
    let solve = run(&["solve-wall", "-", "--seed", "4"], Some(inst));
    assert!(
        solve.status.success(),
        "{}",
        String::from_utf8_lossy(&solve.stderr)
    );
    let out = String::from_utf8(solve.stdout).unwrap();
    assert!(out.contains("verified true"));
}

#[test]
fn render_and_bench_smoke() {
    let dir = tempdir();
    let inst_path = dir.join("i.txt");
    std::fs::write(&inst_path, "ndpgrid v1\nside 6\npairs 1\n1 2 4 4\n").unwrap();
    let svg_path = dir.join("out.svg");
    let render = run(
        &[
            "render",
            inst_path.to_str().unwrap(),
            "--svg",
            svg_path.to_str().unwrap(),
        ],
        None,
    );
    assert!(render.status.success());
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));

    let bench = run(
        &["bench", "--sides", "12", "--count", "2", "--seed", "3"],
        None,
    );
    assert!(bench.status.success());
    let table = String::from_utf8(bench.stdout).unwrap();
    assert!(table.starts_with("instance k routed oracle"));
    // stdout is timing-free; a second run is byte-identical
    let bench2 = run(
        &["bench", "--sides", "12", "--count", "2", "--seed", "3"],
        None,
    );
    assert_eq!(table, String::from_utf8(bench2.stdout).unwrap());
    std::fs::remove_dir_all(dir).ok();
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "ndpgrid-test-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
