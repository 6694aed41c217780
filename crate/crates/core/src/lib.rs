//! Probabilistic social choice with exact rational arithmetic.
//!
//! The crate implements the rank-maximal equal contribution rule and its
//! scoring-vector generalisation, reference rules (random serial
//! dictatorship, rank-maximal randomisation, random dictatorship), an exact
//! simplex solver, and checkers for efficiency, participation,
//! strategyproofness, fairness and monotonicity.
//!
//! ```
//! use pscfkit::prefs::Profile;
//! use pscfkit::rules::rmec;
//!
//! let profile = Profile::from_lines(&["a", "b"], &["a > b", "a > b", "b > a"]).unwrap();
//! let outcome = rmec(&profile).lottery;
//! assert_eq!(outcome.display(&profile.labels()).to_string(), "2/3 a + 1/3 b");
//! ```

pub mod error;
pub mod harness;
pub mod lottery;
pub mod prefs;
pub mod ratlp;
pub mod rules;
pub mod verify;

pub use error::{Error, Result};
pub use lottery::{Lottery, Rational, SdRelation};
pub use prefs::{Profile, WeakOrder};
pub use rules::Rule;
