fn main() {
    std::process::exit(fractarith::cli::dispatch(std::env::args_os()));
}
