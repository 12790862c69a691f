fn main() {
    std::process::exit(frozen_vortex::cli::main_with_args(std::env::args_os()));
}
