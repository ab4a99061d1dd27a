fn main() {
    std::process::exit(leontief::cli::run(std::env::args_os()));
}
