fn main() -> std::process::ExitCode {
    spectral_clt::cli::main()
}
