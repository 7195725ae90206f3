use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn committed_header_is_current() {
    let dir = crate_dir();
    let config = cbindgen::Config::from_file(dir.join("cbindgen.toml")).unwrap();
    let mut fresh = Vec::new();
    cbindgen::Builder::new()
        .with_crate(&dir)
        .with_config(config)
        .generate()
        .unwrap()
        .write(&mut fresh);
    let on_disk = std::fs::read(dir.join("include/parkjam.h")).unwrap();
    assert!(fresh == on_disk, "include/parkjam.h is stale");
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/parkjam.h")).unwrap();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing");
    }
    assert!(header.contains("typedef struct PjField PjField;"));
    assert!(header.contains("PJ_STATUS_ARMOUR_OVERFLOW = 3"));
}

/// Directory holding the static library built alongside this test.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "parkjam.h"

int main(void) {
    PjField *f = NULL;
    if (pj_field_new(3, 1, &f) != PJ_STATUS_OK) return 10;
    int32_t c = 0;
    double u = 0;
    if (pj_uniform_at(f, &c, 1, &u) != PJ_STATUS_OK || !(u > 0 && u < 1)) return 11;
    uint8_t w[21];
    if (pj_sample_window(f, &c, 1, 10, 64, w, 21) != PJ_STATUS_OK) return 12;
    for (int i = 0; i + 1 < 21; i++) if (w[i] && w[i + 1]) return 13;
    pj_field_free(f);
    if (pj_field_new(3, 0, &f) != PJ_STATUS_INVALID_ARGUMENT) return 14;
    if (strstr(pj_last_error_message(), "dimension") == NULL) return 15;
    double rho = 0;
    if (pj_exact_rho(&rho) != PJ_STATUS_OK) return 16;
    printf("%.12f %s\n", rho, pj_version());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let lib = artifact_dir().join("libparkjam_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    let exe = tmp.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir().join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(Path::new(&exe)).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), format!("0.432332358382 {}", env!("CARGO_PKG_VERSION")));
}
