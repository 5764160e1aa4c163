#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Copies the robo-taxi case and its sidecars into a fresh directory.
pub fn scratch() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures_dir()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        if name.starts_with("robotaxi.") && !name.contains("golden") && !name.contains("script") {
            std::fs::copy(&path, dir.path().join(&name)).unwrap();
        }
    }
    let case = dir.path().join("robotaxi.eaa");
    (dir, case)
}

pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

pub fn eaa<S: AsRef<str>>(args: &[S]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("eaa").chain(args.iter().map(AsRef::as_ref));
    let status = eaa_cli::run(argv, &mut out, &mut err);
    Output {
        code: status.code(),
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}
