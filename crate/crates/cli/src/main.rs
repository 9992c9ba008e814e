fn main() {
    let code = clockback::run_to_exit_code(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr());
    std::process::exit(code);
}
