fn main() {
    std::process::exit(frontera::cli::run(std::env::args_os()));
}
