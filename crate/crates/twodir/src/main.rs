fn main() {
    std::process::exit(twodir::cli::run(std::env::args_os()));
}
