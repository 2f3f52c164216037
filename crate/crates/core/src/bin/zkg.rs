fn main() {
    std::process::exit(zkg_core::cli::main(std::env::args_os()));
}
