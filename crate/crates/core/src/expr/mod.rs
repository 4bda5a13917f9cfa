//! Expression parsing, manifold files, rendering and reports.

mod manifold;
mod parse;
mod render;
pub mod report;

pub use manifold::{load_input, load_manifold, load_map, parse_input, InputFile, ManifoldSpec, MapSpec};
pub use parse::{parse_ast, parse_expr, Expr, ParseError, ParseErrorKind, VarKind, MAX_EXPONENT};
pub use render::{render_jet, render_jet_display, render_value, render_var};
