fn main() {
    std::process::exit(blochlab::cli::run(std::env::args_os()));
}
