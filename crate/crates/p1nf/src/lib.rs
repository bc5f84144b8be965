//! Exact normal-form conjugation for Painlevé I near its movable double
//! poles, and a complex-plane integrator built on top of it.
//!
//! The equation `y'' = 6 y^2 + x` becomes autonomous, `u'' = 6 u^2`, under
//! a change of independent variable `x = gamma(t, v, w)` computed here as
//! an exact power series in the pole-adapted chart `v = -y'/y^2`,
//! `w = y^3/y'^2`.  The crate provides:
//!
//! - the recurrence that determines `gamma` order by order, in exact
//!   rational arithmetic, together with the resonance obstruction that
//!   singles out this equation among its perturbations
//!   ([`normal_form`]);
//! - evaluation and inversion of the resulting map and its companion
//!   series ([`charts`]);
//! - a pole-crossing integrator: adaptive Runge-Kutta away from poles,
//!   conjugation to the autonomous equation near them ([`integrate`],
//!   [`elliptic`]);
//! - serialization of coefficient tables and a command-line front end
//!   ([`io`], [`cli`]).

pub mod rat;
pub mod series;

pub mod normal_form;

pub mod charts;
pub mod elliptic;
pub mod integrate;

pub mod cli;
pub mod io;
