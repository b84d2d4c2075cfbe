fn main() {
    std::process::exit(actdeg::cli::run_from(std::env::args_os()));
}
