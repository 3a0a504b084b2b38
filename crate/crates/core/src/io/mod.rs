//! File formats: problems, label files, traces, renders, plus the
//! synthetic and image-based problem builders.

pub mod ingest;
pub mod labels;
pub mod problem;
pub mod render;
pub mod synth;

pub use ingest::{ingest_rgb, ingest_superpixels};
pub use labels::{read_labels, write_labels, write_trace_csv};
pub use problem::{load_problem, parse_problem, Footprint, ProblemFile};
pub use render::{render_labels, render_ppm};
pub use synth::{synthesize, SyntheticSpec};
