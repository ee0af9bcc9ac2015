//! Writes the 32-bin deconvolution fixture as text files.
//!
//! ```text
//! cargo run -p divgrad-core --example write_fixture -- crates/core/fixtures/deconv32
//! ```

use std::path::PathBuf;

use divgrad_core::fixtures::deconvolution_fixture;
use divgrad_core::textio::{format_matrix, format_vector};

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/deconv32".into()));
    std::fs::create_dir_all(&dir)?;
    let f = deconvolution_fixture();
    let m = &f.model;
    std::fs::write(dir.join("H.csv"), format_matrix(m.rows(), m.cols(), m.matrix()))?;
    std::fs::write(dir.join("y.csv"), format_vector(m.y().as_slice()))?;
    std::fs::write(dir.join("x_true.csv"), format_vector(&f.x_true))?;
    std::fs::write(dir.join("x0.csv"), format_vector(&f.x0))?;
    println!("wrote {}", dir.display());
    Ok(())
}
