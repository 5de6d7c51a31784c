use std::net::SocketAddr;

use clap::Parser;

/// Affordance service: embedding queries, experiments, and env sessions
/// over HTTP/JSON.
#[derive(Parser)]
#[command(name = "affordance-service", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 7878)]
    port: u16,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    affordance_service::init_tracing();
    let args = Args::parse();
    let addr: SocketAddr = format!("{}:{}", args.host, args.port).parse()?;
    affordance_service::serve(addr).await
}
