fn main() {
    std::process::exit(robininv_cli::run(std::env::args_os()));
}
