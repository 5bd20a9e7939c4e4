fn main() {
    std::process::exit(inflow::cli::run(std::env::args_os()));
}
