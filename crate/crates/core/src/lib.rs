//! Exact truncated q-series for Jacobi theta functions, with machinery to
//! verify alternate circular summation identities and the lattice-sum
//! formulas for powers of the Euler product.

pub mod circsum;
pub mod dsl;
pub mod etapower;
pub mod exactnum;
pub mod lattice;
pub mod qxseries;
pub mod report;
pub mod thetakernel;
