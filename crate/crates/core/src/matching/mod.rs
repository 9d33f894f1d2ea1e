//! Perfect matchings and iterated 1-factor peeling.

mod bipartite;
mod blossom;

pub use bipartite::{bipartite_perfect_matching, hopcroft_karp, BipartiteOutcome};
pub use blossom::maximum_matching;
mod peel;

pub use peel::{
    cgh_threshold, check_prop_girth_bounds, check_prop_lambda_bounds, near_prime_gap_constant,
    peel_one_factor, peel_to_degree, peel_to_degree_with_spectrum, peel_with_spectrum,
    perfect_matching, Matching, PeelError, PeelOutcome, PeelResult, PeelStep, PeelTrace, SeedBound,
    SpectralSnapshot,
};
