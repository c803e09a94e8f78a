fn main() {
    std::process::exit(sfield::cli::run(std::env::args_os()));
}
