fn main() {
    std::process::exit(irland::cli::run(std::env::args_os()));
}
