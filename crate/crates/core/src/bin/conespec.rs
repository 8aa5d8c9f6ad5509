fn main() {
    std::process::exit(conespec::cli::run(std::env::args_os()));
}
