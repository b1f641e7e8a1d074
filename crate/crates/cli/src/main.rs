use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let env_order = std::env::var(fcl_cli::config::ORDER_ENV).ok();
    let out = fcl_cli::execute(args, env_order.as_deref());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.exit_code);
}
