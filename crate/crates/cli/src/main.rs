use std::io::Write;
use std::process::ExitCode;

use pbsgraph_cli::{run, CmdOutputOrExit, EXIT_OK, EXIT_USAGE};

fn main() -> ExitCode {
    let code = match run(std::env::args().collect()) {
        CmdOutputOrExit::Output(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            out.code
        }
        CmdOutputOrExit::Error(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        CmdOutputOrExit::Clap(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    };
    ExitCode::from(code as u8)
}
