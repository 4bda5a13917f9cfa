//! Exact jet calculus for generic CR submanifolds `Im w = phi(z, zb, Re w)`:
//! CR frames, Lie derivatives of characteristic forms, multiplier
//! determinants, nondegeneracy orders at the origin, and diagnostics for
//! Denjoy-Carleman weight sequences.

pub mod error;
pub mod expr;
pub mod frame;
pub mod jet;
pub mod lie;
pub mod nondeg;
pub mod weights;

pub use error::{Error, Result};
pub use expr::{load_input, load_manifold, load_map, parse_expr, render_jet, ManifoldSpec, MapSpec};
pub use frame::{CrFrame, Field, HoloForm};
pub use jet::{GaussianRational, Jet, JetMatrix, MultiIndex, Validity, Var, VarSig};
pub use lie::{lie_once, lie_power_recursive, LieCalculus, LieRow, LieSchedule};
pub use nondeg::{
    finite_order, map_finite_order, s_factor, search_multipliers, weak_check_first_codim, weak_check_hypersurface,
    MapNondegReport, NondegReport, SFactor, WeakReport, Witness,
};
pub use weights::WeightSequence;
