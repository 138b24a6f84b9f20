//! Exact and numeric verification of hyperlogarithm identities attached to
//! conic fibrations on del Pezzo surfaces.
//!
//! A del Pezzo surface `X_r` (the blow-up of the projective plane in `r`
//! general points, `3 <= r <= 8`) carries finitely many lines and finitely
//! many conic fibration classes; each fibration has exactly `r - 1` reducible
//! fibers, and each reducible fiber splits into a pair of lines.  Attaching to
//! every fibration class an antisymmetrized wedge of its reducible fibers
//! produces a family of integer tensors whose sum over all classes vanishes.
//! That single combinatorial identity specializes, through period integrals of
//! the fibration maps, to the classical functional equations of polylogarithms
//! (Cauchy's identity at `r = 3`, Abel's five-term relation at `r = 4`) and to
//! higher analogues for `r = 5, 6`.
//!
//! The crate is split into an exact half and a numeric half:
//!
//! * [`picard`] — the Picard lattice of `X_r` with its intersection form;
//! * [`weyl`] — the Weyl group action and orbit enumeration with witnesses;
//! * [`curves`] — lines, conic classes, reducible fibers, type census;
//! * [`wedge`] — sparse exterior algebra over the free module on the lines;
//! * [`hlog`] — the tau family, its vanishing sum, and the relation space;
//! * [`ratlin`] — exact rational linear algebra (RREF, rank, null space);
//! * [`planegeom`] — exact plane models: point configurations, interpolation,
//!   pencils, and the built-in degree-5 and degree-4 parametrized models;
//! * [`hyperlog`] — numeric hyperlogarithm germs: series transport along
//!   paths, antisymmetrization, the Rogers dilogarithm;
//! * [`verify`] — end-to-end drivers joining the two halves: exact relation
//!   summaries and numeric identity residuals with margin checks;
//! * [`report`] — serializable verification records for the CLI.
//!
//! All lattice and geometry computations are exact (64-bit integers with
//! overflow checks, or arbitrary-precision rationals); floating point enters
//! only in the final germ transport, whose truncation error is controlled by
//! an embedded tail estimate.

pub mod curves;
pub mod hlog;
pub mod hyperlog;
pub mod picard;
pub mod planegeom;
pub mod ratlin;
pub mod report;
pub mod verify;
pub mod wedge;
pub mod weyl;

pub use curves::SurfaceData;
pub use picard::PicClass;
