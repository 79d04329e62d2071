//! String rewriting modulo a set of unoriented relations.
//!
//! A presentation splits its relations into oriented primary rules R and
//! unoriented modulo rules E; rewriting happens in one of the modes R, ER,
//! RE, ERE. On top of the rewrite engine sit completion modulo E,
//! critical-branching analysis, coherent completion (square cells
//! witnessing confluence modulo), and the quotient to a globular coherent
//! presentation of the presented monoid.

pub mod branching;
pub mod coherence;
pub mod completion;
pub mod eclass;
pub mod order;
pub mod parse;
pub mod presentation;
pub mod records;
pub mod rewrite;

pub use eclass::{Bounds, Session};
pub use presentation::{Mode, PolygraphModulo, Word};

/// Shared presentations used across the test suite.
pub mod test_fixtures {
    /// The four-generator commutative-monoid presentation: two primary
    /// rules and all six commutations, rewriting in mode ERE.
    pub const GOLDEN_62: &str = "\
# commutative monoid on four generators
generators: x1 x2 x3 x4
order: deglex x1 > x2 > x3 > x4
mode: ERE
rule beta: x1 x3 => x2 x4
rule gamma: x1 x2 => x1
modulo commutation
";

    /// The same presentation after completion modulo: one extra rule.
    pub const COMPLETED_62: &str = "\
generators: x1 x2 x3 x4
order: deglex x1 > x2 > x3 > x4
mode: ERE
rule beta: x1 x3 => x2 x4
rule gamma: x1 x2 => x1
rule d0: x2 x4 x2 => x4 x2
modulo commutation
";

    /// A convergent two-rule system with empty E; its two critical pairs
    /// generate the classical Squier coherence data.
    pub const SQUIER_TOY: &str = "\
generators: a b
order: deglex a > b
mode: R
rule r0: a b => a
rule r1: b a => a
";

    /// The unique S-normal form of `a b` is `b c`, which the oriented E
    /// rewrites; so Irr(E) is not E-normalizing for this system.
    pub const NON_E_NORMALIZING: &str = "\
generators: a b c
order: deglex a > b > c
mode: ER
rule r0: a b => b c
modulo m0: b c == c b
";
}
