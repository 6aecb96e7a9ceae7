//! Rebuild the shipped language profiles from the training texts.
//!
//! Usage: `cargo run --example build_profiles -- [DATA_DIR]` (default
//! `data/langid`). Reads `DATA_DIR/train/<code>.txt` and writes
//! `DATA_DIR/<code>.txt`.

use std::path::PathBuf;

use moralens_core::corpus::{LanguageProfile, PROFILE_SIZE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data/langid"));
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir.join("train"))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for path in entries.iter().filter(|p| p.extension().is_some_and(|e| e == "txt")) {
        let code = path.file_stem().and_then(|s| s.to_str()).ok_or("bad file name")?;
        let text = std::fs::read_to_string(path)?;
        let profile = LanguageProfile::from_text(code, &text, PROFILE_SIZE);
        let out = dir.join(format!("{code}.txt"));
        profile.save(&out)?;
        println!("{code}: {} trigrams -> {}", profile.len(), out.display());
    }
    Ok(())
}
