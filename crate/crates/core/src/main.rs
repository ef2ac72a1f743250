fn main() {
    std::process::exit(xlaguerre::cli::run(std::env::args_os()));
}
