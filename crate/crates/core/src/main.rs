fn main() -> std::process::ExitCode {
    ontalign::cli::main()
}
