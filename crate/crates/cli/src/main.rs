use clap::Parser;

fn main() {
    // Die quietly when stdout is closed early (e.g. piped into `head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = screenwright_cli::Cli::parse();
    std::process::exit(screenwright_cli::run(cli));
}
