//! Neural-network solvers for boundary value problems in computational
//! mechanics. Small multilayer perceptrons approximate the unknown
//! fields; training minimizes either the variational energy of the
//! system or the mean-squared strong-form residual.

pub mod autodiff;
pub mod bvp;
pub mod dynamics;
pub mod elasticity;
pub mod network;
pub mod geometry;
pub mod hyper;
pub mod optim;
pub mod phasefield;
pub mod piezo;
pub mod plate;
pub mod cli;
pub mod validation;
