use std::io::Write;

fn main() {
    let (out, err, code) = superfield_cli::run_from(std::env::args_os());
    std::io::stdout().write_all(out.as_bytes()).ok();
    std::io::stderr().write_all(err.as_bytes()).ok();
    std::process::exit(code);
}
