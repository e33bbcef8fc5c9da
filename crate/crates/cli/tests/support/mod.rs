//! Helpers shared by the binary-level tests: run the `tasksuggest` binary
//! against the toy fixtures in a scratch directory.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tasksuggest"))
        .args(args)
        .output()
        .expect("spawn tasksuggest")
}

/// Runs and requires success, returning stdout.
pub fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "tasksuggest {args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes a copy of the toy configuration into `dir` with absolute data
/// paths, `out = dir/out`, the given configurations and epoch count.
pub fn toy_config(dir: &Path, configs: &[&str], epochs: usize) -> PathBuf {
    let fx = fixtures();
    let mut t: toml::Table = fs::read_to_string(fx.join("toy.toml")).unwrap().parse().unwrap();
    let abs = |name: &str| toml::Value::String(fx.join(name).display().to_string());
    t.insert("out".into(), toml::Value::String(dir.join("out").display().to_string()));
    t.insert("queries".into(), abs("queries.tsv"));
    t.insert("qrels".into(), abs("qrels.tsv"));
    t.insert(
        "configs".into(),
        toml::Value::Array(configs.iter().map(|c| toml::Value::String(c.to_string())).collect()),
    );
    for s in t["sources"].as_array_mut().unwrap() {
        let s = s.as_table_mut().unwrap();
        let p = s["path"].as_str().unwrap().to_string();
        s.insert("path".into(), abs(&p));
    }
    for model in ["char_nlm", "seq2seq"] {
        t[model]
            .as_table_mut()
            .unwrap()
            .insert("epochs".into(), toml::Value::Integer(epochs as i64));
    }
    let path = dir.join("toy.toml");
    fs::write(&path, toml::to_string(&t).unwrap()).unwrap();
    path
}

/// ingest → train → suggest → pool → eval; returns the report.
pub fn pipeline(config: &Path) -> String {
    let c = config.to_str().unwrap();
    for cmd in ["ingest", "train", "suggest", "pool"] {
        ok(&["--config", c, cmd]);
    }
    ok(&["--config", c, "eval"])
}
