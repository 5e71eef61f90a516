fn main() {
    std::process::exit(cle_cli::run(std::env::args_os()));
}
