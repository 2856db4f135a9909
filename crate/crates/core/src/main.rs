fn main() {
    std::process::exit(hmax::cli::run(std::env::args_os()));
}
