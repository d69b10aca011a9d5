use std::path::Path;
use std::process::Command;

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fsqca.h")).unwrap()
}

#[test]
fn header_declares_the_api() {
    let h = header();
    for name in [
        "fsqca_last_error",
        "fsqca_string_free",
        "fsqca_calibrate",
        "fsqca_bonus_band",
        "fsqca_consistency",
        "fsqca_coverage",
        "fsqca_truth_table_new",
        "fsqca_truth_table_free",
        "fsqca_truth_table_k",
        "fsqca_truth_table_row",
        "fsqca_solve",
        "fsqca_solution_free",
        "fsqca_solution_term_count",
        "fsqca_solution_literal",
        "fsqca_solution_expression",
        "fsqca_run_pipeline",
    ] {
        assert!(h.contains(&format!("{name}(")), "header lacks {name}");
    }
    assert!(h.contains("typedef struct FsqcaTruthTable FsqcaTruthTable;"));
    assert!(h.contains("typedef struct FsqcaSolution FsqcaSolution;"));
    assert!(h.contains("FSQCA_STATUS_OK = 0"));
    assert!(h.contains("FSQCA_STATUS_PANIC = 6"));
    assert!(h.starts_with("#ifndef FSQCA_H"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(cc.status.success());
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let src = tempfile::Builder::new().suffix(".c").tempfile().unwrap();
    std::fs::write(
        src.path(),
        "#include \"fsqca.h\"\nint main(void) { FsqcaTruthTable *t = 0; return (int)fsqca_truth_table_k(t); }\n",
    )
    .unwrap();
    let o = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&dir)
        .arg(src.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
