fn main() {
    std::process::exit(fca_cli::run(std::env::args_os()));
}
