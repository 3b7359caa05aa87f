//! Exact linear algebra of `SL(2)` representations: weight bases, the
//! unipotent and diagonal actions, the block `B(m, r)`, the constant `κ`,
//! randomized checks of the resulting norm inequalities, and an estimator for
//! the `(C, α)`-good property of polynomial families.

mod exact;
mod good;
mod irrep;

pub use exact::{binomial, operator_norm, rational, Rational, RationalMatrix};
pub use good::{
    adjoint_family, default_rho_grid, good_function_fit, test_intervals, GoodFamilyReport,
    SublevelCheck, GRID_POINTS,
};
pub use irrep::{
    a_matrix, b_det_check, b_det_exponent, b_matrix, build_irrep, commutator_check,
    diagonal_matrix, exp_series, kappa, kappa_exact, lemma_holds, r_of, unipotent_matrix,
    verify_corollary, verify_direct_sum, verify_lemma_sl2, CorollaryReport, DirectSumReport,
    IrrepAction, VerifyReport, WeightSplit,
};
