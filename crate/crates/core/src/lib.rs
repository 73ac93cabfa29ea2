//! Spectral geometry and Morse theory on the Poincaré dodecahedral space.
pub mod binform;
pub mod critscan;
pub mod exactnum;
pub mod galerkin;
pub mod jet;
pub mod quatgroup;
pub mod spherepoly;
pub mod splitting;
