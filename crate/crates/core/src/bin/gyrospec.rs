fn main() {
    std::process::exit(gyrospec::cli::main_with(std::env::args_os()));
}
