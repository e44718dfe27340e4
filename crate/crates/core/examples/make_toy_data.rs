//! Regenerates the bundled toy instances under `data/`.
//!
//! ```text
//! cargo run -p hyperteam-core --example make_toy_data -- data
//! ```

use std::path::PathBuf;

use hyperteam_core::{instance, synthetic};
use serde_json::json;

fn main() -> hyperteam_core::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;

    let aps = synthetic::aps_like_mirror(0)?;
    let meta = json!({"generator": "aps_like_mirror", "seed": 0});
    std::fs::write(dir.join("aps_like.json"), instance::to_json_string(&aps, Some(meta)))?;

    let mag = synthetic::mag_like_mirror(0)?;
    let meta = json!({"generator": "mag_like_mirror", "seed": 0});
    let mut text = serde_json::to_string(&instance::to_json_value(&mag, Some(meta)))?;
    text.push('\n');
    std::fs::write(dir.join("mag_like.json"), text)?;
    Ok(())
}
