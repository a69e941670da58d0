use std::process::ExitCode;

fn main() -> ExitCode {
    refit_cli::init_logging();
    let cli = refit_cli::parse_args();
    ExitCode::from(refit_cli::run(cli))
}
