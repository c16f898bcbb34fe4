fn main() {
    std::process::exit(lts_cli::run(std::env::args_os()));
}
