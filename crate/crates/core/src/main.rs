fn main() {
    std::process::exit(prodint::cli::run(std::env::args_os()));
}
