fn main() {
    std::process::exit(lhz_cli::run(std::env::args_os()));
}
