fn main() {
    std::process::exit(hdecert::cli::run(std::env::args_os()));
}
