use std::env;
use std::path::PathBuf;

use cbindgen::Language;

fn main() {
    let dir = env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    let header = PathBuf::from(&dir).join("include").join("qrw.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    cbindgen::Builder::new()
        .with_crate(&dir)
        .with_language(Language::C)
        .with_include_guard("QRW_H")
        .with_documentation(true)
        .generate()
        .expect("unable to generate C bindings")
        .write_to_file(header);
}
