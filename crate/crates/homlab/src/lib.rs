//! homlab: deciding and cross-validating homomorphism-indistinguishability
//! relations on finite graphs.
//!
//! The library offers three independent routes to the same family of
//! equivalence relations and lets them check each other:
//!
//! * direct homomorphism counting and bilabelled tensor algebra ([`hom`]),
//! * exact rational feasibility of the characterizing linear systems
//!   ([`linsys`]),
//! * Weisfeiler–Leman colour refinement ([`wl`]),
//!
//! plus constructive machinery: width parameters and word compilation
//! ([`widths`]), the finite basal generator families ([`basal`]), synced
//! Krylov-style spectral comparison ([`spectra`]), and generation of
//! non-isomorphic bounded-degree pairs that agree on all tree counts
//! ([`counterexamples`]).

pub mod basal;
pub mod counterexamples;
pub mod graphs;
pub mod hom;
pub mod linsys;
pub mod spectra;
pub mod util;
pub mod widths;
pub mod wl;

/// Maximum number of entries any single dense tensor or linear system is
/// allowed to materialize. Overridable through the `HOMLAB_CAP` environment
/// variable; defaults to 10^7.
pub fn entry_cap() -> usize {
    match std::env::var("HOMLAB_CAP") {
        Ok(s) => s.trim().parse().unwrap_or(10_000_000),
        Err(_) => 10_000_000,
    }
}
