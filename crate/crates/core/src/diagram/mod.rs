//! Explanation diagrams: a renderer-independent grid model and an SVG
//! emitter.

mod model;
mod svg;

pub use model::{
    build_diagram, prototype_order, Cell, Chart, ChartKind, ColorMap, ColorTick, DiagramModel, Readout, Tag,
    TagState,
};
pub use svg::{render_svg, SvgStyle};
