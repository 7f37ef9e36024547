//! Online selection on random toroidal Voronoi diagrams.
//!
//! A player watches `n` uniform points of the unit torus arrive one by one
//! and must irrevocably pick one; the payoff is the area of the picked
//! site's cell in the final Voronoi diagram. This crate provides the
//! geometry ([`torus`], [`voronoi`]), the game engine ([`game`]), the
//! balls-into-bins toolkit ([`occupancy`]) and a seeded Monte Carlo harness
//! ([`experiments`]) with a command-line front end ([`cli`]).


pub mod cli;
pub mod error;
pub mod experiments;
pub mod game;
pub mod occupancy;
pub mod rng;
pub mod torus;
pub mod voronoi;

pub use error::{Error, Result};
pub use torus::{canonicalize, torus_distance, GridIndex, TorusPoint};
pub use voronoi::{build_voronoi, VoronoiCell, VoronoiDiagram};
