fn main() {
    std::process::exit(scout_core::cli::run(std::env::args_os()));
}
