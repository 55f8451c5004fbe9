fn main() {
    std::process::exit(mid_sampling::cli::run(std::env::args_os()));
}
