//! The two-parameter observation/follow model and its maximum-likelihood
//! fit, plus logistic regression with Wald odds ratios.

mod linalg;
mod logit;
mod model;

pub use logit::{logistic_fit, odds_ratios, LogisticModel, LogitError, OddsRatio};
pub use model::{fit_pq, trf_probability, FitError, FitInput, FitReport, FitRow, FitSemantics};
