use std::path::PathBuf;
use std::process::{Command, Output};

fn qiit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qiit")).args(args).env_remove("QIIT_BUDGET").output().expect("binary runs")
}

fn sig(name: &str) -> String {
    core_dir().join("signatures").join(format!("{name}.qiit")).display().to_string()
}

fn alg(name: &str) -> String {
    core_dir().join("algebras").join(format!("{name}.qalg")).display().to_string()
}

fn core_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_exit_codes() {
    assert_eq!(qiit(&["check", &sig("con_ty")]).status.code(), Some(0));
    assert_eq!(qiit(&["check", &sig("empty")]).status.code(), Some(0));
    let o = qiit(&["check", &sig("cyclic")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("forward sort reference"), "{}", stderr(&o));
    assert!(stderr(&o).contains("cyclic.qiit:2:"), "diagnostics carry spans");
}

#[test]
fn missing_file_is_an_io_error() {
    assert_eq!(qiit(&["check", "/nonexistent/x.qiit"]).status.code(), Some(3));
}

#[test]
fn usage_errors_do_not_collide_with_budget_code() {
    assert_eq!(qiit(&["model"]).status.code(), Some(1));
    assert_eq!(qiit(&["model", &sig("nat"), "--budget", "0"]).status.code(), Some(1));
}

#[test]
fn elim_trees_has_path_over_method() {
    let o = qiit(&["elim", &sig("trees2")]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("m_mix : (f : A → T) → (f_ih : (a : A) → Q(f a)) → (s : A ≅ A) → m_node f f_ih =[ap Q (mix f s)]"));
}

#[test]
fn elim_structured_reparses() {
    let o = qiit(&["elim", &sig("nat"), "--format", "structured"]);
    assert!(o.status.success());
    let back = qiit::eliminator::parse_structured(&stdout(&o)).unwrap();
    assert_eq!(back, qiit::eliminator::derive_eliminator(&qiit::bundled::nat()));
}

#[test]
fn elim_onesort_has_only_a_motive() {
    let text = stdout(&qiit(&["elim", &sig("onesort")]));
    let methods: Vec<&str> =
        text.lines().skip_while(|l| *l != "-- methods").skip(1).take_while(|l| !l.starts_with("--")).collect();
    assert!(methods.is_empty(), "{text}");
    assert!(text.contains("Q : X → Set"));
}

#[test]
fn model_class_counts() {
    assert!(stdout(&qiit(&["model", &sig("interval"), "--depth", "1"])).starts_with("I: 1 class\n"));
    assert!(stdout(&qiit(&["model", &sig("nat"), "--depth", "5"])).starts_with("N: 6 classes\n"));
    // leaf, node{leaf,leaf}, the two mixed trees merged, node{n,n}
    assert!(stdout(&qiit(&["model", &sig("trees2"), "--depth", "2"])).starts_with("T: 4 classes\n"));
}

#[test]
fn model_budget_exit_code_and_env_override() {
    let o = qiit(&["model", &sig("nat"), "--depth", "20", "--budget", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget of 5"));
    let o = Command::new(env!("CARGO_BIN_EXE_qiit"))
        .args(["model", &sig("nat"), "--depth", "20"])
        .env("QIIT_BUDGET", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget of 7"));
}

#[test]
fn model_output_ignores_seed_and_threads() {
    let base = qiit(&["model", &sig("con_ty"), "--depth", "6", "--format", "structured"]);
    for extra in [["--seed", "1"], ["--seed", "99"], ["--threads", "1"], ["--threads", "4"]] {
        let mut args = vec!["model", &sig("con_ty"), "--depth", "6", "--format", "structured"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        args.extend(extra.iter().map(|s| s.to_string()));
        let o = Command::new(env!("CARGO_BIN_EXE_qiit")).args(&args).output().unwrap();
        assert_eq!(o.stdout, base.stdout, "{extra:?}");
    }
}

#[test]
fn fold_through_a_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("nat.qmodel").display().to_string();
    assert!(qiit(&["model", &sig("nat"), "--depth", "4", "--out", &dump]).status.success());
    let o = qiit(&["fold", &dump, &alg("nat_mod3"), "--unique"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("N: suc (suc (suc zero)) ↦ 0"));
    assert!(text.contains("homomorphisms: 1"));

    let tdump = dir.path().join("t.qmodel").display().to_string();
    assert!(qiit(&["model", &sig("trees2"), "--depth", "2", "--out", &tdump]).status.success());
    let o = qiit(&["fold", &tdump, &alg("trees_first")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mix at ({a0 => 0, a1 => 1}, {a0 => a1, a1 => a0})"), "{}", stderr(&o));
    assert_eq!(qiit(&["fold", &tdump, &alg("trees_isnode")]).status.code(), Some(0));

    let idump = dir.path().join("i.qmodel").display().to_string();
    assert!(qiit(&["model", &sig("interval"), "--depth", "1", "--out", &idump]).status.success());
    let o = qiit(&["fold", &idump, &alg("interval_two"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mapping"].as_array().unwrap().len(), 1);
    assert_eq!(qiit(&["fold", &idump, &alg("interval_apart")]).status.code(), Some(1));
}

#[test]
fn tampered_dump_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("nat.qmodel");
    assert!(qiit(&["model", &sig("nat"), "--depth", "2", "--out", &dump.display().to_string()]).status.success());
    let text = std::fs::read_to_string(&dump).unwrap().replace("\"merges\": 0", "\"merges\": 3");
    std::fs::write(&dump, text).unwrap();
    let o = qiit(&["fold", &dump.display().to_string(), &alg("nat_mod2")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("does not match"));
}

#[test]
fn sections_over_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("nat.qmodel").display().to_string();
    assert!(qiit(&["model", &sig("nat"), "--depth", "3", "--out", &dump]).status.success());
    let o = qiit(&["section", &dump]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("motive parity: section found"));
    assert!(text.contains("suc (suc (suc zero)) ↦ (suc (suc (suc zero)), odd)"), "{text}");
}

#[test]
fn sections_from_a_fibred_document() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("nat.qmodel").display().to_string();
    assert!(qiit(&["model", &sig("nat"), "--depth", "3", "--out", &dump]).status.success());
    let m = qiit::model::build_model(&qiit::bundled::nat(), &qiit::model::BuildOptions::depth(3)).unwrap();
    let (_, parity) = qiit::props::fibred_examples(&m).into_iter().find(|(n, _)| n == "parity").unwrap();
    let mut doc = serde_json::to_value(parity.unwrap().to_doc()).unwrap();
    let path = dir.path().join("parity.qfib");
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = qiit(&["section", &dump, "--fibred", &path.display().to_string()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("section found"));
    // Motives over nat have two positions.
    doc["methods"][1][0]["q"] = 7.into();
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = qiit(&["section", &dump, "--fibred", &path.display().to_string()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn limit_of_a_product_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    let d = serde_json::json!({
        "objects": [
            {"name": "two", "base": ["x", "y"], "fibres": [["p"], ["q", "r"]]},
            {"name": "three", "base": ["u", "v", "w"], "fibres": [["1"], ["2", "3"], []]}
        ],
        "arrows": []
    });
    std::fs::write(&path, d.to_string()).unwrap();
    let o = qiit(&["limit", &path.display().to_string()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("base: 6 elements, total: 9\n"), "{text}");
    assert!(text.contains("(y, v): (q, 2) (q, 3) (r, 2) (r, 3)"));
}

#[test]
fn props_suites_pass() {
    for (name, depth) in [("nat", "4"), ("interval", "1"), ("trees2", "2")] {
        let o = qiit(&["props", &sig(name), "--depth", depth]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
    let text = stdout(&qiit(&["props", &sig("interval"), "--depth", "1"]));
    assert!(text.contains("PASS fold forces seg endpoints equal in interval_two"));
    let o = qiit(&["props", &sig("nat"), "--depth", "2", "--format", "structured"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["failed"], 0);
    assert_eq!(v["format_version"], 1);
}
