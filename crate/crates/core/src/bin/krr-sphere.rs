fn main() {
    std::process::exit(krr_sphere::cli::main_with_args(std::env::args_os()));
}
