//! Regenerates the files under `data/`.
//!
//! Usage: `cargo run -p reward-zero --example generate_data [dir]`

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    std::fs::create_dir_all(&dir)?;
    for (name, contents) in reward_zero::bench::synthetic::data_files() {
        std::fs::write(dir.join(name), contents)?;
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}
