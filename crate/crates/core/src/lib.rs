//! Symmetric full-correlation Bell expressions for `n` parties with `m`
//! settings and `k` outcomes.
//!
//! * [`scenario`]: scenarios, coefficient functions, expressions and their correlator form.
//! * [`decompose`]: the party-recursive split into `(n-1)`-party expressions.
//! * [`reduction`]: input/output relabellings onto the chained (BKP) and
//!   Svetlichny-CGLMP forms.
//! * [`combinatorial`]: exact local, Svetlichny and G-group bounds by enumeration.
//! * [`analytic`] and [`circulant`]: closed-form Tsirelson, Svetlichny and
//!   biseparable bounds and the modified circulant matrix behind the latter.
//! * [`quantum`]: GHZ states with equatorial measurements and phase optimization.
//! * [`behavior`]: behavior tables, validation, evaluation and classification.

pub mod analytic;
pub mod behavior;
pub mod catalogue;
pub mod circulant;
pub mod combinatorial;
pub mod decompose;
pub mod error;
pub mod quantum;
pub mod reduction;
pub mod report;
pub mod scenario;
pub mod tensor;

pub use behavior::{classify, evaluate, Behavior, ClassificationReport};
pub use combinatorial::{
    evaluate_on_strategy, g_group_bound, local_bound, svetlichny_bound, BoundOptions,
    DeterministicStrategy, GroupedStrategy, Strategy,
};
pub use error::{Error, Result};
pub use report::{BoundKind, BoundReport, BoundValue, Method};
pub use scenario::{BellExpression, CoefficientFunction, CorrelatorForm, Scenario};
pub use tensor::ExpandedTensor;
