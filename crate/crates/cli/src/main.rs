use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter("VARCAP_LOG")).target(env_logger::Target::Stderr).init();
    std::process::exit(varcap_cli::run(std::env::args_os()));
}
