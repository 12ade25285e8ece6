fn main() {
    std::process::exit(nonconv::cli::run(std::env::args_os()));
}
