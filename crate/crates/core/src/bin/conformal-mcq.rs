fn main() {
    std::process::exit(conformal_mcq::cli::run(std::env::args_os()));
}
