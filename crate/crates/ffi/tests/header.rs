//! Checks the generated C header and, when a C compiler is on PATH, builds
//! and runs a small C program against the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const HEADER: &str = include_str!("../include/ekm.h");

#[test]
fn header_declares_the_abi() {
    for name in [
        "typedef struct EkmDataset EkmDataset;",
        "typedef struct EkmSolution EkmSolution;",
        "EKM_STATUS_OK = 0",
        "EKM_STATUS_INFEASIBLE = 4",
        "ekm_last_error_message(void)",
        "ekm_dataset_from_rows(",
        "ekm_dataset_from_csv(",
        "ekm_dataset_free(",
        "ekm_solve(",
        "ekm_solution_objective(",
        "ekm_solution_medoids(",
        "ekm_solution_assignment(",
        "ekm_solution_free(",
        "ekm_rank_colex(",
        "ekm_unrank_colex(",
    ] {
        assert!(HEADER.contains(name), "header lacks {name}");
    }
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include "ekm.h"
int main(void) {
    const double data[] = {0, 1, 2, 10, 11};
    EkmDataset *ds = NULL;
    EkmSolution *sol = NULL;
    size_t medoids[2];
    if (ekm_dataset_from_rows(data, 5, 1, &ds) != EKM_STATUS_OK) return 1;
    if (ekm_solve(ds, 2, "ekm", "sqeuclidean", 0, false, &sol) != EKM_STATUS_OK) return 2;
    if (ekm_solution_medoids(sol, medoids, 2) != EKM_STATUS_OK) return 3;
    printf("%zu %zu %g\n", medoids[0], medoids[1], ekm_solution_objective(sol));
    if (ekm_solve(ds, 9, NULL, NULL, 0, false, &sol) != EKM_STATUS_INVALID_ARGUMENT) return 4;
    if (ekm_last_error_message() == NULL) return 5;
    ekm_solution_free(sol);
    ekm_dataset_free(ds);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler ({cc}); skipping link test");
        return;
    }
    let lib = target_dir().join("libekm_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping link test", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "C program exited with {:?}",
        out.status
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1 3 3");
}
