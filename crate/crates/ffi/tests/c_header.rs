//! Compiles a C program against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "hypermagnet.h"

#define CHECK(call)                                              \
    do {                                                         \
        HmStatus s = (call);                                     \
        if (s != HM_STATUS_OK) {                                 \
            fprintf(stderr, "%s: %d %s\n", #call, s, hm_last_error()); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    size_t offsets[] = {0, 3, 5};
    size_t vertices[] = {0, 1, 2, 0, 1};
    double gamma[] = {7, 1, 1, 1, 3};
    HmHypergraph *h = NULL;
    CHECK(hm_hypergraph_new(3, 2, offsets, vertices, NULL, &h));
    CHECK(hm_hypergraph_set_edvw(h, gamma, 5));

    HmTransition *p = NULL;
    CHECK(hm_transition_new(h, HM_WALK_KIND_EDVW, &p));
    double m[9];
    CHECK(hm_transition_values(p, m, 9));
    for (int i = 0; i < 3; i++) {
        double s = m[3 * i] + m[3 * i + 1] + m[3 * i + 2];
        if (fabs(s - 1.0) > 1e-12) return 2;
    }
    bool reversible = true;
    CHECK(hm_transition_is_reversible(p, 1e-8, false, &reversible, NULL));
    if (reversible) return 3;

    HmLaplacian *l = NULL;
    CHECK(hm_laplacian_new(p, 0.25, HM_LAPLACIAN_FORM_NORMALIZED, true, &l));
    double ev[3];
    CHECK(hm_laplacian_eigenvalues(l, ev, 3));
    if (ev[0] < -1e-12 || ev[2] > 2.0 + 1e-12) return 4;

    HmLaplacian *bad = NULL;
    if (hm_laplacian_new(p, -1.0, HM_LAPLACIAN_FORM_NORMALIZED, false, &bad)
        != HM_STATUS_INVALID_INPUT) return 5;
    if (hm_last_error() == NULL) return 6;

    printf("%.6f %.6f %.6f\n", ev[0], ev[1], ev[2]);
    hm_laplacian_free(l);
    hm_transition_free(p);
    hm_hypergraph_free(h);
    return 0;
}
"#;

/// `target/<profile>`, two levels above the test executable.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = artifact_dir().join("libhypermagnet_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();

    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .expect("a C compiler on PATH");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    let ev: Vec<f64> = String::from_utf8_lossy(&run.stdout)
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(ev.len(), 3);
    assert!(ev.windows(2).all(|w| w[0] <= w[1]));
}
