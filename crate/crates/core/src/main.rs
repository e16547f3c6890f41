fn main() {
    std::process::exit(lrational::cli::main_with(std::env::args_os()));
}
