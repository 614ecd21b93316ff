fn main() -> std::process::ExitCode {
    qwk::cli::main_with_args(std::env::args_os())
}
