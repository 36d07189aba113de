fn main() {
    std::process::exit(prespec_cli::run(std::env::args_os()));
}
