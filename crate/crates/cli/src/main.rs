fn main() {
    std::process::exit(uqreg_cli::run(std::env::args_os()));
}
