//! Published final test log-probabilities (nats) for 500-hidden-unit RBMs
//! trained with CD-1 on randomly ordered streams. They are carried through
//! comparison output as annotations and are never asserted against.

use crate::online::TrainerKind;

/// Tag written next to every reference value.
pub const REFERENCE_TAG: &str = "published n_h=500 random-order result; annotation only";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedResult {
    pub dataset: &'static str,
    pub ocdgr: f64,
    pub er_im: f64,
    pub er_ml: f64,
    /// Offline CD-1 training on the full dataset.
    pub offline: f64,
}

impl PublishedResult {
    pub fn for_trainer(&self, kind: TrainerKind) -> f64 {
        match kind {
            TrainerKind::Ocdgr => self.ocdgr,
            TrainerKind::ErIm => self.er_im,
            TrainerKind::ErMl => self.er_ml,
        }
    }
}

const fn row(dataset: &'static str, ocdgr: f64, er_im: f64, er_ml: f64, offline: f64) -> PublishedResult {
    PublishedResult {
        dataset,
        ocdgr,
        er_im,
        er_ml,
        offline,
    }
}

pub const PUBLISHED: [PublishedResult; 9] = [
    row("MNIST", -114.52, -151.67, -167.11, -125.53),
    row("ADULT", -19.64, -18.08, -17.28, -16.26),
    row("Connect4", -16.28, -16.03, -17.64, -22.66),
    row("DNA", -103.14, -111.81, -114.84, -96.74),
    row("Mushrooms", -16.64, -20.38, -17.58, -15.15),
    row("NIPS-0-12", -290.06, -365.03, -339.82, -277.37),
    row("OCR-letters", -47.61, -51.35, -53.85, -43.05),
    row("RCV1", -53.28, -56.34, -79.06, -48.88),
    row("Web", -33.47, -32.58, -35.07, -29.38),
];

/// Case-insensitive lookup by dataset name.
pub fn published(dataset: &str) -> Option<&'static PublishedResult> {
    PUBLISHED.iter().find(|r| r.dataset.eq_ignore_ascii_case(dataset))
}
