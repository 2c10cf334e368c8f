fn main() {
    // QZ (zggev) comes from the system LAPACK; everything else is pure Rust.
    println!("cargo:rustc-link-lib=dylib=lapack");
    println!("cargo:rustc-link-lib=dylib=blas");
}
