//! Harish-Chandra–Schwartz algebras of discrete subgroups of SL(n,R):
//! Cartan geometry, the Harish-Chandra function, truncated convolution
//! operators and a suite of numerical checks of the decay inequalities that
//! relate them.

pub mod boundary;
pub mod discrete;
pub mod error;
pub mod haar;
pub mod lie;
pub mod operator;
pub mod quadrature;
pub mod verify;

pub use boundary::{
    apply_pi, cocycle, cocycle_mass, harish_chandra_xi, pairing, pi_operator_norm, unit_pairing,
    AdaptiveXi, BoundaryFunction, BoundaryGrid, BoundaryPoint, GridXi, PiNormEstimate, TabulatedXi,
    XiEvaluator, XiMethod,
};
pub use discrete::{
    convolve, generate_ball, generate_ball_capped, schwartz_norm, sobolev_norm,
    xi_summability_partial, BallIndex, GroupFunction, GroupPresentation,
};
pub use error::{Error, Result};
pub use haar::{
    build_k_quadrature, cartan_density, cd_constant, integrate_bi_k_invariant, CdEstimate,
    ChamberQuadrature, KQuadrature, QuadratureSpec,
};
pub use lie::{
    cartan_decompose, cartan_projection, iwasawa_projection, length, random_element,
    random_rotation, subadditivity_check, CartanTriple, ChamberVector, GroupElement,
    RootSystemData,
};
pub use operator::{
    adjoint, budgeted_domain, lambda_norm_lower, lambda_norm_lower_on, shalom_compare,
    NormEstimate, PowerOptions, ShalomComparison,
};
pub use verify::{
    max_over_median, run_suite, verdict, Bundle, RunConfig, Table, TestCorpus, VerificationReport,
    STATEMENTS,
};
