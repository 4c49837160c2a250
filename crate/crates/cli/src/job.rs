//! JSON job descriptions for pattern generation.

use std::path::{Path, PathBuf};

use ornament_core::fixtures::random_fd;
use ornament_core::raster::WHITE;
use ornament_core::{
    apply_color_scheme, generate_with_cosets, Color, ColorScheme, FundamentalDomain, GenerateOptions, GroupName,
    Lattice, RasterPattern, Resampling, Vec2,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LatticeSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

/// Where the fundamental domain comes from.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FdSource {
    /// One flat color.
    Blank {
        #[serde(default = "white")]
        color: Color,
    },
    /// Random three-color cells.
    Random {
        #[serde(default)]
        seed: u64,
    },
    /// A PNG whose pixel `(0, 0)` sits at `offset` (default: the top-left of
    /// the domain's bounding box plus margin).
    Png {
        path: PathBuf,
        #[serde(default)]
        offset: Option<[f64; 2]>,
    },
}

fn white() -> Color {
    WHITE
}

fn default_size() -> usize {
    512
}

fn default_cell() -> f64 {
    100.0
}

fn default_supersample() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GenerateJob {
    pub group: String,
    #[serde(default = "default_size")]
    pub width: usize,
    #[serde(default = "default_size")]
    pub height: usize,
    /// Explicit basis; otherwise the group's standard lattice of side `cell`.
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    #[serde(default = "default_cell")]
    pub cell: f64,
    /// Cell origin in pixels; defaults to the canvas center.
    #[serde(default)]
    pub anchor: Option<[f64; 2]>,
    pub fd: FdSource,
    #[serde(default)]
    pub resampling: Resampling,
    #[serde(default = "default_supersample")]
    pub supersample: u32,
    #[serde(default)]
    pub color_scheme: Option<ColorScheme>,
    /// Output file, relative to the output directory.
    pub output: String,
}

/// Parses a single job, a list of jobs, or `{"jobs": [...]}`.
pub fn parse_jobs(text: &str) -> CliResult<Vec<GenerateJob>> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let jobs = match v {
        serde_json::Value::Array(_) => serde_json::from_value(v)?,
        serde_json::Value::Object(mut o) if o.contains_key("jobs") && o.len() == 1 => {
            serde_json::from_value(o.remove("jobs").expect("checked"))?
        }
        _ => vec![serde_json::from_value(v)?],
    };
    if jobs.is_empty() {
        return Err(CliError::Schema("job file lists no jobs".into()));
    }
    Ok(jobs)
}

impl GenerateJob {
    pub fn group_name(&self) -> CliResult<GroupName> {
        Ok(self.group.parse::<GroupName>()?)
    }

    pub fn lattice(&self, group: GroupName) -> CliResult<Lattice> {
        match &self.lattice {
            Some(l) => Ok(Lattice::new(l.a.into(), l.b.into())?),
            None if self.cell > 0.0 => Ok(group.group().default_lattice(self.cell)),
            None => Err(CliError::Schema(format!("cell must be positive, got {}", self.cell))),
        }
    }

    /// Renders the job; relative FD paths are resolved against `base`.
    pub fn render(&self, base: &Path) -> CliResult<RasterPattern> {
        let group = self.group_name()?;
        let lattice = self.lattice(group)?;
        let anchor = self.anchor.map(Vec2::from).unwrap_or(Vec2::new(self.width as f64 / 2.0, self.height as f64 / 2.0));
        let fd = match &self.fd {
            FdSource::Blank { color } => FundamentalDomain::from_painter(group, &lattice, anchor, vec![*color], |_| 0)?,
            FdSource::Random { seed } => random_fd(group, &lattice, anchor, *seed)?,
            FdSource::Png { path, offset } => {
                let path = base.join(path);
                let image = RasterPattern::load_png(&path)?;
                let polygon = group.group().fd_polygon.clone();
                let (frame_offset, w, h) = FundamentalDomain::frame(&polygon, &lattice, anchor);
                let offset = offset.map(Vec2::from).unwrap_or(frame_offset);
                let covers = offset.x <= frame_offset.x
                    && offset.y <= frame_offset.y
                    && offset.x + image.width() as f64 >= frame_offset.x + w as f64
                    && offset.y + image.height() as f64 >= frame_offset.y + h as f64;
                if !covers {
                    return Err(CliError::Schema(format!(
                        "{}: {}x{} image does not cover the {w}x{h} domain frame of {group}",
                        path.display(),
                        image.width(),
                        image.height()
                    )));
                }
                let image = if self.color_scheme.is_some() {
                    let (idx, palette) = image.palette_view()?;
                    RasterPattern::from_indexed(image.width(), image.height(), idx, palette)?
                } else {
                    image
                };
                FundamentalDomain { image, offset, polygon, anchor }
            }
        };
        let opts = GenerateOptions {
            width: self.width,
            height: self.height,
            resampling: self.resampling,
            supersample: self.supersample,
        };
        let generation = generate_with_cosets(&fd, group, &lattice, &opts)?;
        match &self.color_scheme {
            Some(scheme) => Ok(apply_color_scheme(&generation, scheme)?),
            None => Ok(generation.pattern),
        }
    }
}
