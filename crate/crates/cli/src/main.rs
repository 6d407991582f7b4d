fn main() {
    std::process::exit(recursep_cli::run(std::env::args_os()));
}
