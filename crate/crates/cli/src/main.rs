use std::io::Write;

fn main() {
    let out = primesquare_cli::run(std::env::args().skip(1));
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    if let Some(err) = &out.error {
        eprintln!("{}", serde_json::to_string(err).expect("error serializes"));
    }
    std::process::exit(out.code);
}
