fn main() {
    std::process::exit(polykan::cli::run(std::env::args_os()));
}
