//! Certification and simulation of output synchronization for networks of
//! heterogeneous input-feedforward-passive (IFP) agents on weighted digraphs.
//!
//! - [`graphnet`]: digraphs, connectivity, Laplacians, Perron weights
//! - [`passivity`]: transfer functions, Routh–Hurwitz, IFP indices
//! - [`certify`]: weak-coupling and platoon gain certificates
//! - [`netsim`]: fixed-step RK4 network simulation with input delays
//! - [`scenarios`]: traffic, platoon and counterexample experiments
//! - [`cli`]: the `ifp-syncnet` command-line front end

pub mod certify;
pub mod cli;
pub mod graphnet;
pub mod passivity;
pub mod netsim;
pub mod ode;
pub mod scenarios;
