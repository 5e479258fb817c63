use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn dlg(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dlg"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(s) = stdin {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    } else {
        drop(child.stdin.take());
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(name: &str) -> String {
    data(name).to_str().unwrap().to_owned()
}

#[test]
fn enumerate_coffee_and_breakfast() {
    let o = dlg(&["enumerate", &p("coffee.spec")], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 14);
    assert!(out.ends_with("# episodes: 13\n"));
    let o = dlg(&["enumerate", &p("breakfast.spec")], None);
    assert!(stdout(&o).ends_with("# episodes: 18\n"));
}

#[test]
fn mine_outputs() {
    let o = dlg(&["mine", &p("gas.episodes")], None);
    assert_eq!(
        stdout(&o),
        "(\"C\" credit-card grade receipt)\nminimal: yes\n"
    );
    let o = dlg(&["mine", &p("coffee.episodes")], None);
    assert_eq!(stdout(&o), "(\"PE*\" size blend cream)\nminimal: yes\n");
}

#[test]
fn enumerate_then_mine_is_a_fixpoint() {
    let dir = tempfile::tempdir().unwrap();
    for spec in [
        "coffee.spec",
        "atm.spec",
        "lunch.spec",
        "breakfast.spec",
        "gas.spec",
    ] {
        let eps = dir.path().join("e");
        std::fs::write(
            &eps,
            dlg(&["enumerate", "--episodes", &p(spec)], None).stdout,
        )
        .unwrap();
        let mined = dlg(&["mine", eps.to_str().unwrap()], None);
        let spec_out = dir.path().join("s");
        let text = stdout(&mined);
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with("minimal:"))
            .map(|l| format!("{l}\n"))
            .collect();
        std::fs::write(&spec_out, body).unwrap();
        let check = dlg(
            &["check", spec_out.to_str().unwrap(), eps.to_str().unwrap()],
            None,
        );
        assert_eq!(check.status.code(), Some(0), "{spec}: {}", stdout(&check));
    }
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.spec");
    std::fs::write(&c, "(\"C\" size blend cream)\n").unwrap();
    let o = dlg(&["check", &p("coffee.spec"), &p("coffee.episodes")], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "excess: 0\ndeficit: 0\n");
    let o = dlg(&["check", c.to_str().unwrap(), &p("coffee.episodes")], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("deficit: 12\n"));
    let pe = dir.path().join("pe.spec");
    std::fs::write(&pe, "(\"PE*\" size blend cream)\n").unwrap();
    let one = dir.path().join("one.episodes");
    std::fs::write(&one, "((size blend cream))\n").unwrap();
    let o = dlg(
        &["check", pe.to_str().unwrap(), one.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("excess: 12\n"));
    let o = dlg(&["check", &p("gas.spec"), &p("coffee.episodes")], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.spec");
    std::fs::write(&bad, "(\"I\" a (\"C\" b c))").unwrap();
    let o = dlg(&["enumerate", bad.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:1"));
    assert_eq!(dlg(&["count", "21"], None).status.code(), Some(2));
    assert_eq!(
        dlg(&["enumerate", "/nonexistent/file"], None).status.code(),
        Some(2)
    );
}

#[test]
fn count_rows() {
    let o = dlg(&["count", "3"], None);
    let out = stdout(&o);
    assert!(
        out.contains("PE*     13\n")
            && out.contains("single_type: 33\n")
            && out.contains("universe: 8191\n")
    );
    let o = dlg(&["count", "5", "--type", "PE*"], None);
    assert!(stdout(&o).contains("PE*     541\n"));
}

#[test]
fn run_transcripts() {
    let o = dlg(
        &["run", &p("coffee.spec"), &p("coffee.domains")],
        Some("size=small blend=dark\ncream=no\n"),
    );
    let out = stdout(&o);
    assert!(out.contains("accepted\naskable: cream (no yes)"), "{out}");
    assert!(
        out.contains("completed: complete blend=dark cream=no size=small\n"),
        "{out}"
    );

    let o = dlg(
        &["run", &p("gas.spec"), &p("gas.domains")],
        Some("grade=87\n:undo\n:quit\n"),
    );
    let out = stdout(&o);
    assert!(out.contains("rejected: order-violation"), "{out}");
    assert!(out.contains("nothing to undo"), "{out}");
    let o = dlg(&["run", &p("gas.spec"), &p("gas.domains")], Some("grade\n"));
    assert!(stdout(&o).contains("rejected: parse"));
}

#[test]
fn hasse_shapes() {
    let gas = stdout(&dlg(&["hasse", &p("gas.spec")], None));
    assert!(gas.contains("n0 -> n1;") && gas.contains("n1 -> n2;"));
    let atm = stdout(&dlg(&["hasse", &p("atm.spec")], None));
    assert_eq!(atm.matches("->").count(), 4);
    let lunch = stdout(&dlg(&["hasse", &p("lunch.spec")], None));
    assert_eq!(lunch.matches("subgraph cluster_").count(), 2);
}

#[test]
fn rewrite_after_history() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.spec");
    std::fs::write(&s, "(\"SPE'\" (\"PE\" a b) (\"PE\" c d))\n").unwrap();
    let o = dlg(&["rewrite", s.to_str().unwrap(), "--after", "d"], None);
    assert_eq!(stdout(&o), "(\"C\" c (\"PE\" a b))\n");
    let o = dlg(&["rewrite", &p("coffee.spec"), "--primitives"], None);
    assert_eq!(stdout(&o).lines().count(), 13);
}
