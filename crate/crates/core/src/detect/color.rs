//! Color permutations induced by isometries of colored patterns.

use crate::error::{Error, Result};
use crate::generate::ColorPermutation;
use crate::geometry::{Isometry2, Vec2};
use crate::raster::RasterPattern;

use super::mismatch::MIN_OVERLAP;

/// Fraction of overlapping pixels that must agree with a single bijection.
pub const PERMUTATION_AGREEMENT: f64 = 0.98;

/// Color-confusion histogram between the pattern and its image under `iso`:
/// `h[i][j]` counts pixels of color `i` whose image has color `j`.
pub fn confusion(pattern: &RasterPattern, iso: &Isometry2) -> Result<(Vec<Vec<u64>>, u64)> {
    let (idx, palette) = pattern.palette_view()?;
    let (w, h) = (pattern.width(), pattern.height());
    let k = palette.len();
    let mut hist = vec![vec![0u64; k]; k];
    let mut total = 0u64;
    for y in 0..h {
        for x in 0..w {
            let q = iso.apply(Vec2::new(x as f64, y as f64));
            let (qx, qy) = (q.x.round(), q.y.round());
            if qx < 0.0 || qy < 0.0 || qx as usize >= w || qy as usize >= h {
                continue;
            }
            let a = idx[y * w + x] as usize;
            let b = idx[qy as usize * w + qx as usize] as usize;
            hist[a][b] += 1;
            total += 1;
        }
    }
    let frac = total as f64 / (w * h) as f64;
    if frac < MIN_OVERLAP {
        return Err(Error::InsufficientOverlap(frac));
    }
    Ok((hist, total))
}

/// The palette permutation induced by `iso`, if at least 98% of overlapping
/// pixels agree with one bijection. Colors are taken from the palette view.
pub fn color_permutation_check(pattern: &RasterPattern, iso: &Isometry2) -> Result<Option<ColorPermutation>> {
    let (hist, total) = confusion(pattern, iso)?;
    let k = hist.len();
    let mut mapping = Vec::with_capacity(k);
    let mut agree = 0u64;
    for (i, row) in hist.iter().enumerate() {
        let (j, &c) = row.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).unwrap_or((i, &0));
        let j = if c == 0 { i } else { j };
        mapping.push(j as u8);
        agree += c;
    }
    let Ok(perm) = ColorPermutation::new(mapping) else {
        return Ok(None);
    };
    Ok((agree as f64 >= PERMUTATION_AGREEMENT * total as f64).then_some(perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Line;
    use crate::raster::{BLUE, RED};

    fn halves() -> RasterPattern {
        let (w, h) = (40, 20);
        let idx = (0..w * h).map(|i| if i % w < 20 { 0 } else { 1 }).collect();
        RasterPattern::from_indexed(w, h, idx, vec![RED, BLUE]).unwrap()
    }

    #[test]
    fn identity_gives_identity() {
        let p = halves();
        let perm = color_permutation_check(&p, &Isometry2::identity()).unwrap().unwrap();
        assert!(perm.is_identity());
    }

    #[test]
    fn mirror_between_halves_swaps() {
        let p = halves();
        let m = Isometry2::reflection(Line::new(Vec2::new(19.5, 0.0), Vec2::new(0.0, 1.0)));
        let perm = color_permutation_check(&p, &m).unwrap().unwrap();
        assert_eq!(perm.mapping, vec![1, 0]);
    }

    #[test]
    fn inconsistent_map_is_none() {
        let p = halves();
        let m = Isometry2::reflection(Line::new(Vec2::new(14.5, 0.0), Vec2::new(0.0, 1.0)));
        assert!(color_permutation_check(&p, &m).unwrap().is_none());
    }
}
