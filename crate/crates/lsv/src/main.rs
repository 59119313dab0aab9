use std::sync::atomic::{AtomicBool, Ordering};

use lsv::config::{self, CliCommand};
use lsv::driver;

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

extern "C" fn on_signal(_sig: libc::c_int) {
    INTERRUPTED.store(true, Ordering::SeqCst);
}

fn main() {
    unsafe {
        libc::signal(libc::SIGINT, on_signal as *const () as libc::sighandler_t);
        libc::signal(libc::SIGTERM, on_signal as *const () as libc::sighandler_t);
    }

    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match config::parse_cli(args) {
        Ok(CliCommand::Help) => {
            print!("{}", config::usage());
            0
        }
        Ok(CliCommand::Run(cfg)) => match driver::run(&cfg, &INTERRUPTED) {
            Ok(artifacts) => {
                for warning in &artifacts.warnings {
                    eprintln!("warning: {warning}");
                }
                let summary = &artifacts.report.summary;
                eprintln!(
                    "verified {} function(s) across {} file(s): {} violation(s)",
                    summary.functions_verified, summary.files_scanned, summary.violations_total
                );
                eprintln!("report: {}", artifacts.report.csv_path.display());
                driver::exit_code_for(&artifacts)
            }
            Err(e) => {
                eprintln!("lsv: {e}");
                driver::error_exit_code(&e)
            }
        },
        Err(e) => {
            eprintln!("lsv: {e}");
            2
        }
    };
    std::process::exit(code);
}
