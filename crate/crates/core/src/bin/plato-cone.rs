fn main() {
    std::process::exit(plato_cone::cli::run(std::env::args_os()));
}
