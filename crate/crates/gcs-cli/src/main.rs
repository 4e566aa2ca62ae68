use std::process::exit;

fn main() {
    exit(gcs_cli::run(std::env::args_os()));
}
