fn main() {
    std::process::exit(lob_cushion::cli::run(std::env::args_os()));
}
