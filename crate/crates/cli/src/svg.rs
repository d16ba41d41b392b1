//! Deterministic SVG scatter plots of a disk embedding.
//!
//! The canvas covers [-1.05, 1.05] squared with the unit circle drawn as an
//! outline; points are fixed-radius dots colored by cycling a categorical
//! palette over their labels. Coordinates are written with five fixed
//! decimals, so the same embedding always produces byte-identical output.

use std::path::Path;

use anyhow::Result;
use hyptsne::geometry::PoincarePoint;

use crate::io::write_atomic;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc949", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

pub fn render_svg(embedding: &[PoincarePoint], labels: Option<&[u32]>) -> String {
    let mut out = String::with_capacity(128 + embedding.len() * 64);
    out.push_str(concat!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"720\" ",
        "viewBox=\"-1.05 -1.05 2.1 2.1\">\n",
        "<rect x=\"-1.05\" y=\"-1.05\" width=\"2.1\" height=\"2.1\" fill=\"#ffffff\"/>\n",
        "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#555555\" stroke-width=\"0.005\"/>\n",
    ));
    for (i, p) in embedding.iter().enumerate() {
        let color = match labels {
            Some(l) => PALETTE[l[i] as usize % PALETTE.len()],
            None => PALETTE[0],
        };
        // Flip y so the plot is in the usual mathematical orientation
        // (SVG's y axis points down); keep zero signless for stable output.
        let cy = if p.y == 0.0 { 0.0 } else { -p.y };
        out.push_str(&format!(
            "<circle cx=\"{:.5}\" cy=\"{:.5}\" r=\"0.008\" fill=\"{}\"/>\n",
            p.x, cy, color
        ));
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(path: &Path, embedding: &[PoincarePoint], labels: Option<&[u32]>) -> Result<()> {
    write_atomic(path, render_svg(embedding, labels).as_bytes())
}
