fn main() {
    std::process::exit(magicint_cli::run(std::env::args_os()));
}
