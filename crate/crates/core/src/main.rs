fn main() {
    std::process::exit(prophet_voronoi::cli::main_with_args(std::env::args_os()));
}
