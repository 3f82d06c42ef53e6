fn main() {
    std::process::exit(atfield::cli::run(std::env::args_os()));
}
