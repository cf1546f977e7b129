fn main() {
    std::process::exit(selfaffine::cli::run(std::env::args_os()));
}
