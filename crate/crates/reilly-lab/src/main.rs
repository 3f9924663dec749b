fn main() -> std::process::ExitCode {
    reilly_lab::cli::main_from(std::env::args_os())
}
