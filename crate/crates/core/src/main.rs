fn main() {
    std::process::exit(bmtransform::cli::main_with_args(std::env::args_os()));
}
