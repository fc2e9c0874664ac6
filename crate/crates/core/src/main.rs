fn main() {
    let code = spectral_corners::cli::run(std::env::args_os());
    std::process::exit(code);
}
