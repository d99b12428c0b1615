//! Composition operators `C_phi` into weighted Bloch spaces.
//!
//! Everything here is finite-`j` numerical evidence: quotient sequences,
//! boundedness and compactness verdicts, essential-norm bands and the annuli
//! diagnostic. None of it is a proof.

mod annuli;
mod band;
mod classify;
mod quotient;
mod transfer;

use std::fmt;

use serde::Serialize;

pub use annuli::{annuli_diagnostic, annulus_index, AnnuliHistogram, AnnulusBucket};
pub use band::{essential_norm_band, EssentialNormBand, DEFAULT_TAIL_FRACTION};
pub use classify::{classify, tail_len, Classification, ClassifyPolicy};
pub use quotient::{quotient_sequence, Denominator, QuotientSeries, QuotientTerm};
pub use transfer::{
    direct_transfer_check, standard_test_family, TestFunction, TransferEntry, TransferReport,
};

/// Three-valued evidence for a property that a finite run cannot decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    StrongYes,
    Inconclusive,
    StrongNo,
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Evidence::StrongYes => "strong_yes",
            Evidence::Inconclusive => "inconclusive",
            Evidence::StrongNo => "strong_no",
        })
    }
}
