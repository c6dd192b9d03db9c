//! Combinatorial computation of Z2-equivariant Heegaard Floer cohomology of
//! knots in the three-sphere.
//!
//! The pipeline starts from a cell-complex encoding of a Heegaard diagram or
//! extended bridge diagram ([`cell::CellDiagram`]), builds the branched double
//! cover with its deck involution ([`cover`]), converts it to a nice diagram by
//! equivariant finger moves ([`nicify`]), enumerates the Floer complex over F2
//! ([`floer`]), and classifies the resulting equivariant cohomology as a
//! finitely generated F2[theta]-module ([`theta`]), together with spectral
//! sequence pages ([`ss`]) and transverse invariants of pointed open books
//! ([`contact`]).

pub mod arrange;
pub mod catalog;
pub mod cell;
pub mod contact;
pub mod cover;
pub mod domain;
pub mod error;
pub mod floer;
pub mod gf2;
pub mod io;
pub mod moves;
pub mod nicify;
pub mod pipeline;
pub mod poly;
pub mod ratlp;
pub mod ss;
pub mod theta;
pub mod zmat;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
