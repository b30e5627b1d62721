//! Colored interval graphs, reductions and unfoldings between the graphs
//! `G_m`, `G_n` built from index sequences, a reachability engine for the
//! union of unfolding ranges, exact annulus classification of radii, and
//! bounded lemma-checking campaigns over all of it.

pub mod annuli;
pub mod formats;
pub mod graphs;
pub mod oracles;
pub mod render;
pub mod sequences;
pub mod unfoldings;
