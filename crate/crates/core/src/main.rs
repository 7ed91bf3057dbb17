fn main() -> std::process::ExitCode {
    thermoptics::cli::main_entry()
}
