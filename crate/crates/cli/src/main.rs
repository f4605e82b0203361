use clap::Parser;

fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(specdamp::run(specdamp::Cli::parse()))
}
