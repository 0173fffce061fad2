//! Simulation and geometry toolkit for the angular behaviour of random walks.
//!
//! The crate samples heavy-tailed and lattice increment laws, drives walks
//! `S_n = X_1 + ... + X_n` with pluggable observers, estimates the set of
//! asymptotic directions from cap-visit evidence, computes s-convex hulls on
//! the sphere, classifies one-dimensional projections and tracks the convex
//! hull of the trajectory.

pub mod criteria;
pub mod direction_estimator;
pub mod error;
pub mod examples;
pub mod experiment;
pub mod hull_tracker;
pub mod plot;
pub mod projection_classifier;
pub mod pruitt;
pub mod rng;
pub mod samplers;
pub mod sphere_geom;
pub mod walk_engine;

mod linalg;
mod numfmt;

pub use error::{Error, Result};
