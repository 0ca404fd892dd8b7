//! Configuration documents, CSV export and SVG plots.

pub mod config;
pub mod csv;
pub mod svg;

pub use self::csv::{read_csv, write_csv};
pub use config::{parse_config, serialize_config, ConfigDocument};
pub use svg::render_svg;
