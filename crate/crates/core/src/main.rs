fn main() {
    std::process::exit(dwshell::cli::run(std::env::args_os()));
}
