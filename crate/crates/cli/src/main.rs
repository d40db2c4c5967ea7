fn main() -> std::process::ExitCode {
    gkp_link_cli::main_entry()
}
