use std::fs;
use std::path::Path;
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/scarlab.h");

#[test]
fn header_declares_api() {
    let text = fs::read_to_string(HEADER).unwrap();
    assert!(text.starts_with("#ifndef SCARLAB_H"));
    for name in [
        "typedef struct ScarlabModel ScarlabModel;",
        "SCARLAB_STATUS_OK = 0",
        "SCARLAB_STATUS_BUFFER_TOO_SMALL = 3",
        "scarlab_model_new(",
        "scarlab_model_free(",
        "scarlab_model_dimension(",
        "scarlab_model_states(",
        "scarlab_model_energies(",
        "scarlab_scar_indices(",
        "scarlab_similarity_residual(",
        "scarlab_evolve_neel(",
        "scarlab_p_nup(",
        "scarlab_entropy(",
        "scarlab_last_error_message(",
        "scarlab_status_string(",
        "scarlab_version(",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("cc not found, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("use.c");
    fs::write(
        &source,
        "#include \"scarlab.h\"\nint main(void) {\n  ScarlabModel *m = 0;\n  size_t dim = 0;\n  \
         ScarlabStatus s = scarlab_model_new(8, &m);\n  if (s == SCARLAB_STATUS_OK) scarlab_model_dimension(m, 0, &dim);\n  \
         scarlab_model_free(m);\n  return (int)dim;\n}\n",
    )
    .unwrap();
    let include = Path::new(HEADER).parent().unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include)
        .arg(&source)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
