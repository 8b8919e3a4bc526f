fn main() {
    std::process::exit(robust_paths::cli::run(std::env::args_os()));
}
