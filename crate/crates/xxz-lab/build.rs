fn main() {
    // ndarray's BLAS-backed matmul needs a CBLAS provider; the netlib LAPACK
    // backend only pulls in the Fortran interfaces.
    println!("cargo:rustc-link-lib=dylib=cblas");
}
