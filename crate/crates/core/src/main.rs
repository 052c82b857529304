fn main() {
    std::process::exit(spinamp::cli_io::run(std::env::args_os()));
}
