fn main() -> std::process::ExitCode {
    anchorlab::cli::main()
}
