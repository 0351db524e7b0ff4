fn main() {
    std::process::exit(bfx_cli::run(std::env::args_os()));
}
