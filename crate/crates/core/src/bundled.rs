//! Model documents shipped with the crate.

/// Four-state allosteric model: states 1 and 2 convert to 3 and 4 at rates
/// proportional to `lambda`, all other rates are constant.
pub const MWC: &str = include_str!("../examples/mwc.json");

/// Four-state chain whose reduced generator vanishes although every
/// finite-`lambda` chain is irreducible.
pub const COUNTEREXAMPLE: &str = include_str!("../examples/counterexample.json");

/// Three-state chain with a single fast state, rates
/// `a12=3, a13=6, a21=1, a23=1, a31=4*lambda, a32=2*lambda`.
pub const THREE_STATE: &str = include_str!("../examples/three_state.json");

/// All bundled documents with their file stems.
pub const ALL: [(&str, &str); 3] = [
    ("mwc", MWC),
    ("counterexample", COUNTEREXAMPLE),
    ("three_state", THREE_STATE),
];
