fn main() {
    std::process::exit(kerr_floquet::cli::run(std::env::args_os()));
}
