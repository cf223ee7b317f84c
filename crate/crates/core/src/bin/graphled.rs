fn main() -> std::process::ExitCode {
    graphled::cli::main()
}
