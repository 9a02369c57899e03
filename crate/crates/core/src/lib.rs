//! Hyperbolic polygons with prescribed angles and their perimeter minimizers,
//! earthquake derivatives of segment lengths, Killing-form identities for
//! infinitesimal isometries of hyperbolic space, and the Whitehead-link
//! character curve.

pub mod hyp2;
pub mod sl2kit;
pub mod format;
pub mod polygon;
pub mod minimizer;
pub mod earthquake;
pub mod charvar;
