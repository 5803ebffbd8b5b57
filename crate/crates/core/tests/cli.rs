use std::path::Path;
use std::process::Command;

use ordauto::cli::run;
use tempfile::TempDir;

fn ordauto(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ordauto").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn presentation(dir: &Path, level: usize, bound: &str, name: &str) -> String {
    let full = path(dir, &format!("full{level}"));
    if !Path::new(&full).exists() {
        assert_eq!(ordauto(&["build-presentation", "-n", &level.to_string(), "-o", &full]).0, 0);
    }
    let out = path(dir, name);
    let (code, _, err) = ordauto(&["restrict", "-p", &full, "-a", bound, "-o", &out]);
    assert_eq!(code, 0, "{err}");
    out
}

#[test]
fn encode_and_decode_are_inverse() {
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let mut terms = Vec::new();
                for (e, k) in [("w^2", a), ("w", b)] {
                    match k {
                        0 => {}
                        1 => terms.push(e.to_string()),
                        _ => terms.push(format!("{e}*{k}")),
                    }
                }
                if c > 0 || terms.is_empty() {
                    terms.push(c.to_string());
                }
                let cnf = terms.join("+");
                for level in ["1", "2"] {
                    let (code, tree, _) = ordauto(&["encode", "-n", level, &cnf]);
                    assert_eq!(code, 0);
                    let (code, back, _) = ordauto(&["decode", "-n", level, tree.trim()]);
                    assert_eq!(code, 0);
                    assert_eq!(back.trim(), cnf);
                }
            }
        }
    }
}

#[test]
fn normal_form_and_trace() {
    let dir = TempDir::new().unwrap();
    let p = presentation(dir.path(), 1, "w*2+3", "r");
    let (code, out, _) = ordauto(&["cnf", "-p", &p]);
    assert_eq!((code, out.as_str()), (0, "w*2+3\n"));
    let (code, traced, _) = ordauto(&["cnf", "-p", &p, "--trace"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = traced.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("peel 0 exponent 1 witness "));
    assert_eq!(lines[5], "w*2+3");
    assert_eq!(ordauto(&["cnf", "-p", &p, "--trace"]).1, traced);
}

#[test]
fn isomorphism_across_levels() {
    let dir = TempDir::new().unwrap();
    let a = presentation(dir.path(), 1, "w*2", "a");
    let b = presentation(dir.path(), 2, "w*2", "b");
    let c = presentation(dir.path(), 1, "w^2", "c");
    let (code, out, _) = ordauto(&["iso", "-p1", &a, "-p2", &b]);
    assert_eq!((code, out.as_str()), (0, "isomorphic\nw*2\nw*2\n"));
    let (code, out, _) = ordauto(&["iso", "-p1", &c, "-p2", &a]);
    assert_eq!((code, out.as_str()), (1, "not-isomorphic\nw^2\nw*2\n"));
}

#[test]
fn queries_and_membership() {
    let dir = TempDir::new().unwrap();
    let p = presentation(dir.path(), 1, "w+3", "r");
    assert_eq!(ordauto(&["query", "-p", &p, "-f", "EX x. ALL y. le(y,x)"]), (0, "true\n".into(), String::new()));
    assert_eq!(ordauto(&["query", "-p", &p, "-f", "ALL x. EX y. add(x,x,y)"]).0, 1);
    let succ = path(dir.path(), "succ.aut");
    let f = "le(x,y) & ~(x=y) & ALL z. (le(z,x) | le(y,z) | z=y)";
    assert_eq!(ordauto(&["query", "-p", &p, "-f", f, "--vars", "x,y", "-o", &succ]).0, 0);
    let code = |n: &str| ordauto(&["encode", "-n", "1", n]).1.trim().to_string();
    let pair = |x: &str, y: &str| {
        let (tx, ty): (ordauto::tree::SigmaTree<String>, ordauto::tree::SigmaTree<String>) =
            (code(x).parse().unwrap(), code(y).parse().unwrap());
        ordauto::tree::convolve(&[&tx, &ty]).unwrap().to_string()
    };
    assert_eq!(ordauto(&["member", "-A", &succ, &pair("w", "w+1")]), (0, "accepted\n".into(), String::new()));
    assert_eq!(ordauto(&["member", "-A", &succ, &pair("1", "w")]).1, "rejected\n");
    assert_eq!(ordauto(&["member", "-A", &succ, &pair("w+2", "w+3")]).1, "rejected\n");
    let dom = path(Path::new(&p), "dom.aut");
    assert_eq!(ordauto(&["member", "-A", &dom, &code("w+2")]).0, 0);
    assert_eq!(ordauto(&["member", "-A", &dom, &code("w*2")]).0, 1);
    let (_, text, _) = ordauto(&["query", "-p", &p, "-f", "le(x,y)"]);
    assert!(text.starts_with("alphabet 0 1\narity 2\n"));
}

#[test]
fn emptiness() {
    let dir = TempDir::new().unwrap();
    let none = path(dir.path(), "none.aut");
    std::fs::write(&none, "alphabet 0 1\nstates q\ninitial q\ntrans q 0 q q\n").unwrap();
    assert_eq!(ordauto(&["empty", "-A", &none]), (0, "empty\n".into(), String::new()));
    let leaf = path(dir.path(), "leaf.aut");
    std::fs::write(&leaf, "alphabet 0 1\nstates q\ninitial q\nleafaccept q 1\n").unwrap();
    assert_eq!(ordauto(&["empty", "-A", &leaf]), (1, "nonempty 1\n".into(), String::new()));
}

#[test]
fn sanity_report() {
    let dir = TempDir::new().unwrap();
    let p = presentation(dir.path(), 1, "w^2+1", "r");
    let (code, out, _) = ordauto(&["check", "-p", &p]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 9);
    assert!(out.lines().all(|l| l.starts_with("ok ")));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(ordauto(&[]).0, 2);
    assert_eq!(ordauto(&["frobnicate"]).0, 2);
    assert_eq!(ordauto(&["encode", "-n", "1"]).0, 2);
    assert_eq!(ordauto(&["encode", "-n", "1", "w+w^2"]).0, 3);
    assert_eq!(ordauto(&["encode", "-n", "1", "w^(w)"]).0, 3);
    assert_eq!(ordauto(&["decode", "-n", "1", "1(0"]).0, 3);
    assert_eq!(ordauto(&["decode", "-n", "1", "0(0,0)"]).0, 3);
    assert_eq!(ordauto(&["build-presentation", "-n", "9", "-o", &path(dir.path(), "x")]).0, 3);
    assert_eq!(ordauto(&["cnf", "-p", &path(dir.path(), "missing")]).0, 3);
    let bad = path(dir.path(), "bad.aut");
    std::fs::write(&bad, "alphabet 0 1\nstates q\nfrobnicate q\n").unwrap();
    assert_eq!(ordauto(&["empty", "-A", &bad]).0, 3);
    let p = presentation(dir.path(), 1, "w*3", "r");
    assert_eq!(ordauto(&["query", "-p", &p, "-f", "le(x)"]).0, 3);
    let (code, _, err) = ordauto(&["--max-states", "3", "query", "-p", &p, "-f", "ALL x. EX y. add(x,y,y)"]);
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("budget"));
    assert_eq!(ordauto(&["--max-peels", "2", "cnf", "-p", &p]).0, 4);
}

#[test]
fn binary_reads_budget_from_environment() {
    let dir = TempDir::new().unwrap();
    let p = presentation(dir.path(), 1, "w*3", "r");
    let bin = env!("CARGO_BIN_EXE_ordauto");
    let status = |env: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.args(["query", "-p", &p, "-f", "ALL x. EX y. le(x,y)"]);
        cmd.env_remove("ORDAUTO_MAX_STATES");
        if let Some(v) = env {
            cmd.env("ORDAUTO_MAX_STATES", v);
        }
        let out = cmd.output().unwrap();
        (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
    };
    assert_eq!(status(None), (0, "true\n".into()));
    assert_eq!(status(Some("3")).0, 4);
}
