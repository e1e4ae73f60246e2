fn main() {
    std::process::exit(homophily_cli::run(std::env::args_os()));
}
