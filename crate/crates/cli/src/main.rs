mod app;

use std::io::Write;
use std::process::ExitCode;

// Deep derivations recurse; give the worker thread room.
const STACK: usize = 256 << 20;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let out = std::thread::Builder::new()
        .stack_size(STACK)
        .spawn(move || app::run(&args))
        .expect("spawn worker")
        .join()
        .unwrap_or_else(|_| app::Outcome::error("internal error"));
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code)
}
