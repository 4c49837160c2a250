//! Ornament images served to participants.

use std::collections::HashMap;
use std::io::Cursor;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use image::{ImageFormat, RgbImage};
use ornament_core::fixtures::{moroccan_composite, random_fixture};
use ornament_core::{GroupName, RasterPattern};

use crate::error::{CliError, CliResult};

/// Side of rendered assets, in pixels.
pub const ASSET_SIZE: usize = 256;
const ASSET_CELL: f64 = 64.0;

/// How an ornament id without an image file is rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// The overlapped p6m/four-fold composite (`moroccan`, `*-ol`).
    Composite,
    /// A random pattern of the first group named among the dash-separated
    /// parts of the id.
    Group(GroupName),
}

pub fn source_of(id: &str) -> Option<Source> {
    let parts: Vec<&str> = id.split('-').collect();
    if parts.iter().any(|p| *p == "moroccan" || *p == "ol") {
        return Some(Source::Composite);
    }
    parts.iter().find_map(|p| p.parse::<GroupName>().ok()).map(Source::Group)
}

/// FNV-1a, so rendered assets do not change between builds.
fn stable_seed(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub fn render(id: &str) -> CliResult<RasterPattern> {
    match source_of(id) {
        Some(Source::Composite) => Ok(moroccan_composite(ASSET_SIZE, ASSET_CELL * 1.25)?.pattern),
        Some(Source::Group(g)) => Ok(random_fixture(g, ASSET_SIZE, ASSET_CELL, stable_seed(id))?.pattern),
        None => Err(CliError::Schema(format!("no group in ornament id '{id}'"))),
    }
}

pub fn png_bytes(p: &RasterPattern) -> Vec<u8> {
    let raw: Vec<u8> = p.rgb().iter().flatten().copied().collect();
    let img = RgbImage::from_raw(p.width() as u32, p.height() as u32, raw).expect("buffer matches size");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encoding");
    out.into_inner()
}

/// PNG bytes by ornament id, from configured files or rendered on first use.
#[derive(Debug, Default)]
pub struct AssetStore {
    files: HashMap<String, PathBuf>,
    cache: Mutex<HashMap<String, Arc<Vec<u8>>>>,
}

impl AssetStore {
    pub fn new(files: impl IntoIterator<Item = (String, PathBuf)>) -> Self {
        AssetStore { files: files.into_iter().collect(), cache: Mutex::default() }
    }

    /// `None` for ids that are neither configured nor renderable.
    pub fn get(&self, id: &str) -> CliResult<Option<Arc<Vec<u8>>>> {
        if let Some(b) = self.cache.lock().expect("asset cache").get(id) {
            return Ok(Some(b.clone()));
        }
        let bytes = match self.files.get(id) {
            Some(path) => std::fs::read(path).map_err(|e| CliError::io(path, e))?,
            None if source_of(id).is_some() => png_bytes(&render(id)?),
            None => return Ok(None),
        };
        let bytes = Arc::new(bytes);
        self.cache.lock().expect("asset cache").insert(id.to_string(), bytes.clone());
        Ok(Some(bytes))
    }
}
