use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("manifest dir"));
    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("generate C header");

    let mut text = Vec::new();
    bindings.write(&mut text);
    let out = crate_dir.join("include").join("provenance.h");
    // Rewriting an unchanged header would retrigger dependent C builds.
    if fs::read(&out).ok().as_deref() != Some(text.as_slice()) {
        fs::create_dir_all(out.parent().expect("include dir")).expect("create include dir");
        fs::write(&out, text).expect("write header");
    }
    println!("cargo:rerun-if-changed=src");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
