//! Numerics for totally real tori in almost Hermitian 4-manifolds: the
//! J-volume and its density `ρ_J`, the mean curvature `H_J` and Maslov form
//! `ξ_J` with the torsion corrections `T_J`, `S_J`, Maslov-type flows (with
//! the ambient optionally evolving by Kähler-Ricci flow on a potential),
//! Lagrangian angles for a holomorphic volume form, and the first and second
//! variation of the J-volume.
//!
//! Everything is discretized on a uniform periodic parameter grid with
//! fourth-order stencils; ambient models are evaluated pointwise from closed
//! forms or potentials.
//!
//! The `examples/` directory has one program per capability:
//! `ambient_models`, `frames_and_volumes`, `maslov_identity`, `symbol`,
//! `maslov_flow`, `coupled_krf`, `calabi_yau_angle`, `str_graphs` and
//! `variation`. The `trflow` binary drives the same code from JSON scenarios.

// Index loops mirror the tensor index notation; the negated comparisons
// are there to reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod calibration;
pub mod fields;
pub mod flows;
pub mod grid;
pub mod immersion;
pub mod linalg;
pub mod scenario;
pub mod tensors;
pub mod variation;
