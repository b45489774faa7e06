//! Static SVG rendering of the Kippenhahn curve, the boundary of `W(A)`,
//! eigenvalues and a fitted disc.

use std::fmt::Write;

use crate::classify::DiscFit;
use crate::error::{KippError, Result};
use crate::kippenhahn::{boundary_polyline, curve_points};
use crate::linalg::eigenvalues;
use crate::matrix::{ComplexMatrix, C64};

/// Drawable layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Boundary,
    CurveBranches,
    Eigenvalues,
    FittedDisc,
}

/// Canvas size, sampling density and the layers to draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub samples: usize,
    pub layers: Vec<Layer>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 480,
            height: 480,
            samples: 360,
            layers: vec![Layer::Boundary, Layer::CurveBranches, Layer::Eigenvalues, Layer::FittedDisc],
        }
    }
}

impl PlotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 8 {
            return Err(KippError::InvalidArgument(format!(
                "plot needs at least 8 samples, got {}",
                self.samples
            )));
        }
        if self.layers.is_empty() {
            return Err(KippError::InvalidArgument("plot needs at least one layer".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(KippError::InvalidArgument("plot size must be positive".into()));
        }
        Ok(())
    }

    fn has(&self, layer: Layer) -> bool {
        self.layers.contains(&layer)
    }
}

/// First lines of every rendered file.
pub const SVG_HEADER: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

const BRANCH_COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

struct Frame {
    cx: f64,
    cy: f64,
    unit: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn map(&self, z: C64) -> (f64, f64) {
        (
            self.width / 2.0 + (z.re - self.cx) * self.unit,
            self.height / 2.0 - (z.im - self.cy) * self.unit,
        )
    }
}

/// Renders the requested layers; `disc` is drawn only when the fitted-disc
/// layer is requested and a fit is supplied.
pub fn render_svg(a: &ComplexMatrix, spec: &PlotSpec, disc: Option<&DiscFit>) -> Result<String> {
    spec.validate()?;
    let boundary = boundary_polyline(a, spec.samples)?;
    let slices = if spec.has(Layer::CurveBranches) {
        curve_points(a, spec.samples)?
    } else {
        Vec::new()
    };
    let eigs = if spec.has(Layer::Eigenvalues) {
        eigenvalues(a)?
    } else {
        Vec::new()
    };

    let mut pts: Vec<C64> = boundary.clone();
    pts.extend(eigs.iter().copied());
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in &pts {
        lo_x = lo_x.min(p.re);
        hi_x = hi_x.max(p.re);
        lo_y = lo_y.min(p.im);
        hi_y = hi_y.max(p.im);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-6);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let frame = Frame {
        cx: (lo_x + hi_x) / 2.0,
        cy: (lo_y + hi_y) / 2.0,
        unit: 0.85 * w.min(h) / span,
        width: w,
        height: h,
    };

    let mut out = String::from(SVG_HEADER);
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    if spec.has(Layer::CurveBranches) {
        let _ = writeln!(out, "<g id=\"curve\">");
        for slice in &slices {
            for (branch, &z) in slice.curve_points.iter().enumerate() {
                let (x, y) = frame.map(z);
                let _ = writeln!(
                    out,
                    "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1.2\" fill=\"{}\"/>",
                    BRANCH_COLORS[branch % BRANCH_COLORS.len()]
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }
    if spec.has(Layer::Boundary) {
        let path: Vec<String> = boundary
            .iter()
            .map(|&z| {
                let (x, y) = frame.map(z);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            "<polygon id=\"boundary\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>",
            path.join(" ")
        );
    }
    if let (true, Some(fit)) = (spec.has(Layer::FittedDisc), disc) {
        let (x, y) = frame.map(fit.center);
        let _ = writeln!(
            out,
            "<circle id=\"disc\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{:.3}\" fill=\"none\" stroke=\"red\" stroke-dasharray=\"4 3\"/>",
            fit.radius * frame.unit
        );
    }
    if spec.has(Layer::Eigenvalues) {
        let _ = writeln!(out, "<g id=\"eigenvalues\">");
        for &z in &eigs {
            let (x, y) = frame.map(z);
            let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"black\"/>");
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
