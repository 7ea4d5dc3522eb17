fn main() {
    std::process::exit(sepbound::cli::run(std::env::args_os()));
}
