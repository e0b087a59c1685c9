//! Kähler–Einstein existence criteria, continuity-method ODE solver and glued
//! asymptotically conical Ricci-flat ansatz for rank-two symmetric spaces.

pub mod ansatz;
pub mod cli;
pub mod criterion;
pub mod exactcore;
pub mod facetnum;
pub mod odesolve;
pub mod quad;
pub mod rootsystems;
