//! Building problems from an RGB image and a super-pixel label map.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::SiteGraph;
use crate::likelihood::Observations;

use super::problem::{Footprint, ProblemFile};

/// Histogram dimension used for image runs.
pub const DEFAULT_BINS: usize = 120;

/// Per-channel bin counts `(r, g, b)` whose product is `bins`, as close to
/// each other as possible (120 -> 4 x 5 x 6).
pub fn channel_bins(bins: usize) -> Result<(usize, usize, usize)> {
    if bins == 0 {
        return Err(Error::Config("bin count must be positive".into()));
    }
    let mut best: Option<(usize, usize, usize)> = None;
    for a in 1..=bins {
        if !bins.is_multiple_of(a) || a * a * a > bins {
            continue;
        }
        let rest = bins / a;
        for b in a..=rest {
            if !rest.is_multiple_of(b) || b * b > rest {
                continue;
            }
            let c = rest / b;
            if best.is_none_or(|(x, _, z)| c - a < z - x) {
                best = Some((a, b, c));
            }
        }
    }
    let (a, b, c) = best.expect("1 x 1 x bins always factors");
    if a > 256 || b > 256 || c > 256 {
        return Err(Error::Config(format!(
            "{bins} bins cannot be split over 8-bit channels"
        )));
    }
    Ok((a, b, c))
}

/// Uniform quantization of an RGB pixel into one of `r * g * b` bins.
pub fn quantize(pixel: [u8; 3], (r, g, b): (usize, usize, usize)) -> usize {
    let q = |v: u8, k: usize| v as usize * k / 256;
    (q(pixel[0], r) * g + q(pixel[1], g)) * b + q(pixel[2], b)
}

/// One site per super-pixel id, a `bins`-bin color histogram per site, and
/// a constant-`beta` edge between every pair of 4-adjacent super-pixels.
/// Ids must cover `0..n` without gaps.
pub fn ingest_rgb(
    width: usize,
    height: usize,
    rgb: &[u8],
    spmap: &[u32],
    bins: usize,
    beta: f64,
) -> Result<ProblemFile> {
    let npix = width * height;
    if rgb.len() != npix * 3 || spmap.len() != npix {
        return Err(Error::Input(format!(
            "image and super-pixel map dimensions differ ({} RGB bytes, {} labels, {width}x{height} pixels)",
            rgb.len(),
            spmap.len()
        )));
    }
    if npix == 0 {
        return Err(Error::Input("empty image".into()));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Config(format!("beta must be positive, got {beta}")));
    }
    let split = channel_bins(bins)?;
    let n = *spmap.iter().max().expect("nonempty") as usize + 1;
    let mut rows = vec![vec![0u32; bins]; n];
    for (px, &site) in rgb.chunks_exact(3).zip(spmap) {
        rows[site as usize][quantize([px[0], px[1], px[2]], split)] += 1;
    }
    if let Some(missing) = rows.iter().position(|r| r.iter().all(|&c| c == 0)) {
        return Err(Error::Input(format!(
            "super-pixel id {missing} covers no pixels"
        )));
    }
    let mut pairs = BTreeSet::new();
    for y in 0..height {
        for x in 0..width {
            let a = spmap[y * width + x];
            let mut link = |b: u32| {
                if a != b {
                    pairs.insert((a.min(b) as usize, a.max(b) as usize));
                }
            };
            if x + 1 < width {
                link(spmap[y * width + x + 1]);
            }
            if y + 1 < height {
                link(spmap[(y + 1) * width + x]);
            }
        }
    }
    Ok(ProblemFile {
        graph: SiteGraph::new(n, pairs.into_iter().map(|(i, j)| (i, j, beta)))?,
        observations: Observations::new(bins, rows)?,
        ground_truth: None,
        footprint: Some(Footprint {
            width,
            height,
            sites: spmap.to_vec(),
        }),
    })
}

/// Reads a whitespace-separated integer raster, one image row per line.
pub fn parse_label_raster(text: &str) -> Result<(usize, usize, Vec<u32>)> {
    let mut width = None;
    let mut values = Vec::new();
    let mut height = 0;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for t in line.split_whitespace() {
            values.push(
                t.parse::<u32>()
                    .map_err(|_| Error::parse(idx + 1, format!("invalid super-pixel id '{t}'")))?,
            );
        }
        let len = values.len() - before;
        match width {
            None => width = Some(len),
            Some(w) if w != len => {
                return Err(Error::parse(
                    idx + 1,
                    format!("row has {len} entries, expected {w}"),
                ))
            }
            _ => {}
        }
        height += 1;
    }
    Ok((width.unwrap_or(0), height, values))
}

/// Loads an image (any format the `image` crate decodes) and a text label
/// raster, and builds the problem.
pub fn ingest_superpixels(
    image_path: impl AsRef<Path>,
    spmap_path: impl AsRef<Path>,
    bins: usize,
    beta: f64,
) -> Result<ProblemFile> {
    let img = image::open(image_path.as_ref())
        .map_err(|e| {
            Error::Input(format!(
                "cannot read {}: {e}",
                image_path.as_ref().display()
            ))
        })?
        .to_rgb8();
    let (w, h, spmap) = parse_label_raster(&std::fs::read_to_string(spmap_path)?)?;
    if (w, h) != (img.width() as usize, img.height() as usize) {
        return Err(Error::Input(format!(
            "image is {}x{}, super-pixel map is {w}x{h}",
            img.width(),
            img.height()
        )));
    }
    ingest_rgb(w, h, img.as_raw(), &spmap, bins, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_split() {
        assert_eq!(channel_bins(120).unwrap(), (4, 5, 6));
        assert_eq!(channel_bins(8).unwrap(), (2, 2, 2));
        assert_eq!(channel_bins(7).unwrap(), (1, 1, 7));
        assert_eq!(DEFAULT_BINS, 120);
    }

    #[test]
    fn quantize_covers_range() {
        let split = channel_bins(120).unwrap();
        assert_eq!(quantize([0, 0, 0], split), 0);
        assert_eq!(quantize([255, 255, 255], split), 119);
    }

    #[test]
    fn two_pixel_image() {
        let p = ingest_rgb(2, 1, &[10, 20, 30, 12, 22, 32], &[0, 1], 120, 0.02).unwrap();
        assert_eq!(p.n_sites(), 2);
        assert_eq!(p.graph.edges().len(), 1);
        assert_eq!(p.observations.row(0), p.observations.row(1));
    }

    #[test]
    fn checkerboard_has_four_edges() {
        let rgb = vec![0u8; 12];
        let p = ingest_rgb(2, 2, &rgb, &[0, 1, 2, 3], 8, 0.5).unwrap();
        assert_eq!(p.n_sites(), 4);
        let pairs: Vec<(usize, usize)> = p.graph.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            ingest_rgb(2, 1, &[0; 6], &[0], 8, 0.1),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            ingest_rgb(2, 1, &[0; 6], &[0, 2], 8, 0.1),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            parse_label_raster("0 1\n2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
