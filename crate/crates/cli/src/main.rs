use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let status = eaa_cli::run(args, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(status.code())
}
