fn main() {
    std::process::exit(relay_align::cli::main_from(std::env::args_os()));
}
