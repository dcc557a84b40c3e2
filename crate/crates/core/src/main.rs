fn main() {
    std::process::exit(zkqr::cli::run(std::env::args_os()));
}
