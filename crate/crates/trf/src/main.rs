fn main() {
    std::process::exit(trf::cli::run_from(std::env::args_os()));
}
