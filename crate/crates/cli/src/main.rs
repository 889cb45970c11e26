fn main() {
    std::process::exit(chlab_cli::run(std::env::args_os()));
}
