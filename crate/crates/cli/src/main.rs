fn main() -> std::process::ExitCode {
    explaineo_cli::cli::main()
}
