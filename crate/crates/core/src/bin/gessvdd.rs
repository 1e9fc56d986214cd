fn main() {
    std::process::exit(gessvdd::cli::run_from(std::env::args_os()));
}
