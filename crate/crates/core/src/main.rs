fn main() {
    std::process::exit(spatialmix::cli::run(std::env::args_os()));
}
