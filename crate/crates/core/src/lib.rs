//! Exact arithmetic and verification tools for Hermitian Maass lifts of
//! general level over an imaginary quadratic field `K = Q(√−D)`.
//!
//! The crate is organized bottom-up:
//!
//! * [`arith`]: integer utilities (factorization, Kronecker symbols, CRT).
//! * [`cyclotomic`]: exact sums of roots of unity with a canonical zero test.
//! * [`quadfield`]: the field, the classes of the inverse different and the
//!   quadratic characters `χ_p`.
//! * [`charsums`]: Gauss sums, the Gauss–Salié identity and quadratic norm sums.
//! * [`thetamat`]: theta transformation matrices and numeric theta series.
//! * [`plusform`]: q-expansions, the plus space, `P_m` and `V_m`.
//! * [`criterion`]: the arithmetic criterion for the lift and its closed forms.
//! * [`lift`]: the coefficient pipeline from plus forms to Maass coefficients.
//! * [`hecke`]: `β`-functions, Hecke coset representatives and `T_p` on `β`.
//! * [`ikeda`]: synthetic eigenforms, twists `f_Q` and the star map.

pub mod arith;
pub mod charsums;
pub mod criterion;
pub mod cyclotomic;
pub mod error;
pub mod hecke;
pub mod ikeda;
pub mod lift;
pub mod plusform;
pub mod quadfield;
pub mod thetamat;

pub use cyclotomic::CycloNum;
pub use error::{Error, Result};
pub use quadfield::{Character, DiffClass, QuadField};
