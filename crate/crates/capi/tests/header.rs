//! Checks that the generated header is usable from a plain C compiler.

use std::path::Path;
use std::process::Command;

const CALLER: &str = r#"
#include <stddef.h>
#include <stdio.h>
#include "rlp.h"

int check(void) {
    double x[6] = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    double y[3] = {1.0, 2.0, 3.0};
    RlpDataset *data = NULL;
    RlpIntervals *iv = NULL;
    RlpCiOptions opts;
    RlpInterval entry;
    double lower[2], upper[2];
    RlpStatus status;

    status = rlp_dataset_new(3, 2, x, y, &data);
    if (status != RLP_STATUS_OK) {
        printf("%s\n", rlp_last_error_message());
        return 1;
    }
    opts = rlp_ci_options_default();
    opts.level = 0.9;
    status = rlp_ci(data, &opts, &iv);
    if (status == RLP_STATUS_OK) {
        size_t m = rlp_intervals_len(iv);
        if (m <= 2) {
            rlp_intervals_bounds(iv, lower, upper, m);
            rlp_intervals_get(iv, 0, &entry);
        }
        rlp_intervals_free(iv);
    }
    printf("%s %f\n", rlp_version(), rlp_intervals_lambda(NULL));
    rlp_dataset_free(data);
    return 0;
}
"#;

#[test]
fn header_compiles_as_c99() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(
        include.join("rlp.h").is_file(),
        "header was not generated at build time"
    );
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("caller.c");
    let obj = dir.path().join("caller.o");
    std::fs::write(&src, CALLER).unwrap();

    let out = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Wextra")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg("-c")
        .arg(&src)
        .arg("-o")
        .arg(&obj)
        .output()
        .expect("cc should be runnable");
    assert!(
        out.status.success(),
        "header failed to compile:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
