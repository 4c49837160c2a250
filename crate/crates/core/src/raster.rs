//! Pixel grids: the common representation of every ornament.
//!
//! Pixel `(i, j)` has its center at pattern coordinate `(i, j)`; x grows to
//! the right and y grows downward.

use std::path::Path;

use image::{Rgb, RgbImage, Rgba, RgbaImage};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub type Color = [u8; 3];

pub const WHITE: Color = [255, 255, 255];
pub const RED: Color = [200, 30, 40];
pub const BLUE: Color = [30, 60, 190];

#[derive(Debug, Clone, PartialEq)]
pub struct RasterPattern {
    width: usize,
    height: usize,
    rgb: Vec<Color>,
    indices: Option<Vec<u8>>,
    palette: Option<Vec<Color>>,
    alpha: Option<Vec<u8>>,
    pub lattice: Option<Lattice>,
}

impl RasterPattern {
    pub fn uniform(width: usize, height: usize, color: Color) -> Result<Self> {
        Self::from_rgb(width, height, vec![color; width * height])
    }

    pub fn from_rgb(width: usize, height: usize, rgb: Vec<Color>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid("pattern dimensions must be at least 1x1".into()));
        }
        if rgb.len() != width * height {
            return Err(Error::Invalid(format!("expected {} pixels, got {}", width * height, rgb.len())));
        }
        Ok(RasterPattern { width, height, rgb, indices: None, palette: None, alpha: None, lattice: None })
    }

    pub fn from_indexed(width: usize, height: usize, indices: Vec<u8>, palette: Vec<Color>) -> Result<Self> {
        if let Some(bad) = indices.iter().find(|&&i| i as usize >= palette.len()) {
            return Err(Error::Invalid(format!("palette index {bad} out of range ({} entries)", palette.len())));
        }
        let rgb = indices.iter().map(|&i| palette[i as usize]).collect();
        let mut p = Self::from_rgb(width, height, rgb)?;
        p.indices = Some(indices);
        p.palette = Some(palette);
        Ok(p)
    }

    pub fn with_alpha(mut self, alpha: Vec<u8>) -> Result<Self> {
        if alpha.len() != self.width * self.height {
            return Err(Error::Invalid("alpha size mismatch".into()));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    pub fn with_lattice(mut self, lattice: Lattice) -> Self {
        self.lattice = Some(lattice);
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rgb(&self) -> &[Color] {
        &self.rgb
    }

    pub fn indices(&self) -> Option<&[u8]> {
        self.indices.as_deref()
    }

    pub fn palette(&self) -> Option<&[Color]> {
        self.palette.as_deref()
    }

    pub fn alpha(&self) -> Option<&[u8]> {
        self.alpha.as_deref()
    }

    pub fn get(&self, x: usize, y: usize) -> Color {
        self.rgb[y * self.width + x]
    }

    pub fn alpha_at(&self, x: usize, y: usize) -> u8 {
        self.alpha.as_ref().map_or(255, |a| a[y * self.width + x])
    }

    /// Drops the palette and alpha, keeping the RGB content.
    pub fn to_rgb_only(&self) -> RasterPattern {
        RasterPattern { indices: None, palette: None, alpha: None, ..self.clone() }
    }

    /// Palette view of the pattern: its own palette when indexed, otherwise
    /// the distinct colors (at most 256) in first-seen order.
    pub fn palette_view(&self) -> Result<(Vec<u8>, Vec<Color>)> {
        if let (Some(i), Some(p)) = (&self.indices, &self.palette) {
            return Ok((i.clone(), p.clone()));
        }
        let mut palette: Vec<Color> = Vec::new();
        let mut idx = Vec::with_capacity(self.rgb.len());
        for c in &self.rgb {
            let k = match palette.iter().position(|p| p == c) {
                Some(k) => k,
                None => {
                    if palette.len() == 256 {
                        return Err(Error::Invalid("pattern has more than 256 colors".into()));
                    }
                    palette.push(*c);
                    palette.len() - 1
                }
            };
            idx.push(k as u8);
        }
        Ok((idx, palette))
    }

    /// Merges palette entries: `mapping[i]` is the new index of color `i`; the
    /// merged class takes the color of its lowest original index.
    pub fn collapse_colors(&self, mapping: &[u8]) -> Result<RasterPattern> {
        let (idx, palette) = self.palette_view()?;
        if mapping.len() < palette.len() {
            return Err(Error::Invalid("color mapping shorter than palette".into()));
        }
        let n = *mapping.iter().max().unwrap_or(&0) as usize + 1;
        let mut new_palette: Vec<Option<Color>> = vec![None; n];
        for (i, c) in palette.iter().enumerate() {
            let slot = &mut new_palette[mapping[i] as usize];
            if slot.is_none() {
                *slot = Some(*c);
            }
        }
        let new_palette: Vec<Color> = new_palette.into_iter().map(|c| c.unwrap_or([0, 0, 0])).collect();
        let new_idx = idx.iter().map(|&i| mapping[i as usize]).collect();
        let mut p = RasterPattern::from_indexed(self.width, self.height, new_idx, new_palette)?;
        p.lattice = self.lattice;
        p.alpha = self.alpha.clone();
        Ok(p)
    }

    /// Sub-window with its top-left corner at `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<RasterPattern> {
        if x0 + w > self.width || y0 + h > self.height || w == 0 || h == 0 {
            return Err(Error::Invalid("crop window outside the pattern".into()));
        }
        fn take<T: Copy>(v: &[T], stride: usize, x0: usize, y0: usize, w: usize, h: usize) -> Vec<T> {
            (y0..y0 + h).flat_map(|y| v[y * stride + x0..y * stride + x0 + w].iter().copied()).collect()
        }
        let s = self.width;
        Ok(RasterPattern {
            width: w,
            height: h,
            rgb: take(&self.rgb, s, x0, y0, w, h),
            indices: self.indices.as_deref().map(|v| take(v, s, x0, y0, w, h)),
            palette: self.palette.clone(),
            alpha: self.alpha.as_deref().map(|v| take(v, s, x0, y0, w, h)),
            lattice: self.lattice,
        })
    }

    /// Fraction of pixels that are not the most frequent color.
    pub fn non_dominant_fraction(&self) -> f64 {
        let mut counts: std::collections::HashMap<Color, usize> = std::collections::HashMap::new();
        for c in &self.rgb {
            *counts.entry(*c).or_default() += 1;
        }
        let max = counts.values().copied().max().unwrap_or(0);
        1.0 - max as f64 / self.rgb.len() as f64
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let (w, h) = (self.width as u32, self.height as u32);
        match &self.alpha {
            Some(alpha) => {
                let mut img = RgbaImage::new(w, h);
                for (i, px) in img.pixels_mut().enumerate() {
                    let c = self.rgb[i];
                    *px = Rgba([c[0], c[1], c[2], alpha[i]]);
                }
                img.save(path)?;
            }
            None => {
                let mut img = RgbImage::new(w, h);
                for (i, px) in img.pixels_mut().enumerate() {
                    *px = Rgb(self.rgb[i]);
                }
                img.save(path)?;
            }
        }
        Ok(())
    }

    /// Loads a PNG; an alpha channel is kept when any pixel is not opaque.
    pub fn load_png(path: impl AsRef<Path>) -> Result<RasterPattern> {
        let img = image::open(path)?.to_rgba8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let rgb: Vec<Color> = img.pixels().map(|p| [p[0], p[1], p[2]]).collect();
        let alpha: Vec<u8> = img.pixels().map(|p| p[3]).collect();
        let p = RasterPattern::from_rgb(w, h, rgb)?;
        if alpha.iter().any(|&a| a != 255) {
            p.with_alpha(alpha)
        } else {
            Ok(p)
        }
    }
}

/// Float planes of a pattern for interpolated sampling, values in [0, 1].
#[derive(Debug, Clone)]
pub struct Sampler {
    pub width: usize,
    pub height: usize,
    planes: [Vec<f32>; 3],
}

impl Sampler {
    pub fn new(p: &RasterPattern) -> Self {
        let n = p.width * p.height;
        let mut planes = [vec![0f32; n], vec![0f32; n], vec![0f32; n]];
        for (i, c) in p.rgb.iter().enumerate() {
            for ch in 0..3 {
                planes[ch][i] = c[ch] as f32 / 255.0;
            }
        }
        Sampler { width: p.width, height: p.height, planes }
    }

    /// Same planes smoothed by two passes of a separable box filter.
    pub fn blurred(&self, radius: usize) -> Sampler {
        let (w, h) = (self.width, self.height);
        let pass = |src: &[f32], horizontal: bool| -> Vec<f32> {
            let mut out = vec![0f32; src.len()];
            let (outer, inner) = if horizontal { (h, w) } else { (w, h) };
            for o in 0..outer {
                let idx = |k: usize| if horizontal { o * w + k } else { k * w + o };
                for k in 0..inner {
                    let lo = k.saturating_sub(radius);
                    let hi = (k + radius).min(inner - 1);
                    let s: f32 = (lo..=hi).map(|j| src[idx(j)]).sum();
                    out[idx(k)] = s / (hi - lo + 1) as f32;
                }
            }
            out
        };
        let planes = self.planes.clone().map(|p| {
            let mut q = p;
            for _ in 0..2 {
                q = pass(&pass(&q, true), false);
            }
            q
        });
        Sampler { width: w, height: h, planes }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> [f32; 3] {
        let i = y * self.width + x;
        [self.planes[0][i], self.planes[1][i], self.planes[2][i]]
    }

    pub fn plane(&self, ch: usize) -> &[f32] {
        &self.planes[ch]
    }

    /// Bilinear sample; `None` outside the pixel-center hull.
    #[inline]
    pub fn bilinear(&self, x: f64, y: f64) -> Option<[f32; 3]> {
        let (wm, hm) = ((self.width - 1) as f64, (self.height - 1) as f64);
        if !(x >= 0.0 && y >= 0.0 && x <= wm && y <= hm) {
            return None;
        }
        if self.width < 2 || self.height < 2 {
            return Some(self.at(x.round() as usize, y.round() as usize));
        }
        let x0 = (x.floor() as usize).min(self.width - 2);
        let y0 = (y.floor() as usize).min(self.height - 2);
        let fx = (x - x0 as f64) as f32;
        let fy = (y - y0 as f64) as f32;
        let i = y0 * self.width + x0;
        let w = self.width;
        let mut out = [0f32; 3];
        for (ch, o) in out.iter_mut().enumerate() {
            let p = &self.planes[ch];
            let top = p[i] + (p[i + 1] - p[i]) * fx;
            let bot = p[i + w] + (p[i + w + 1] - p[i + w]) * fx;
            *o = top + (bot - top) * fy;
        }
        Some(out)
    }

    /// Per-channel standard deviation averaged over channels.
    pub fn mean_std(&self) -> f64 {
        let n = (self.width * self.height) as f64;
        (0..3)
            .map(|ch| {
                let p = &self.planes[ch];
                let mean = p.iter().map(|&v| v as f64).sum::<f64>() / n;
                (p.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n).sqrt()
            })
            .sum::<f64>()
            / 3.0
    }
}
