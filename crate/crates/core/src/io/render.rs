//! Rendering segmentations as binary PPM images.

use std::path::Path;

use crate::error::{Error, Result};
use crate::partition::Partition;

use super::problem::{Footprint, ProblemFile};

/// Color of the `index`-th cluster (in order of first appearance). The map
/// is injective on 24-bit indices, so distinct clusters never share a color.
pub fn palette(index: usize) -> [u8; 3] {
    let mut x = (index as u32).wrapping_mul(0x9E_3779) & 0xFF_FFFF;
    x ^= x >> 11;
    x = x.wrapping_mul(0x2C_1B3D | 1) & 0xFF_FFFF;
    x ^= x >> 13;
    [(x >> 16) as u8, (x >> 8) as u8, x as u8]
}

/// P6 image filling each site's footprint with its cluster color.
pub fn render_ppm(footprint: &Footprint, labels: &[usize]) -> Result<Vec<u8>> {
    let canonical = Partition::from_labels(labels).canonical_labels();
    let mut out = format!("P6\n{} {}\n255\n", footprint.width, footprint.height).into_bytes();
    out.reserve(footprint.sites.len() * 3);
    for &site in &footprint.sites {
        let site = site as usize;
        let &label = canonical.get(site).ok_or_else(|| {
            Error::Input(format!("footprint references site {site} without a label"))
        })?;
        out.extend_from_slice(&palette(label));
    }
    Ok(out)
}

/// Writes the segmentation of `problem` given by `labels` to `path`.
pub fn render_labels(
    problem: &ProblemFile,
    labels: &[usize],
    path: impl AsRef<Path>,
) -> Result<()> {
    if labels.len() != problem.n_sites() {
        return Err(Error::Input(format!(
            "{} labels for {} sites",
            labels.len(),
            problem.n_sites()
        )));
    }
    let footprint = problem.footprint.as_ref().ok_or_else(|| {
        Error::Input(
            "problem has no pixel footprint; only traces and label files can be written".into(),
        )
    })?;
    std::fs::write(path, render_ppm(footprint, labels)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_is_injective_on_small_indices() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..100_000 {
            assert!(seen.insert(palette(i)));
        }
    }

    #[test]
    fn single_cluster_is_uniform() {
        let fp = Footprint {
            width: 4,
            height: 2,
            sites: vec![0, 0, 1, 1, 2, 2, 3, 3],
        };
        let img = render_ppm(&fp, &[5, 5, 5, 5]).unwrap();
        let header = b"P6\n4 2\n255\n".len();
        let pixels = &img[header..];
        assert_eq!(pixels.len(), 24);
        assert!(pixels.chunks(3).all(|c| c == &pixels[..3]));
        assert_eq!(img, render_ppm(&fp, &[1, 1, 1, 1]).unwrap());
    }
}
