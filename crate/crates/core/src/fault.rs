use serde::Serialize;

/// Deliberate corruptions used to confirm that the verification suites notice
/// a broken construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Fault {
    /// Rewritten coordinates hold `J(x⌈q⌢1) + 1` instead of `J(x⌈q⌢1)`.
    OffByOneRewrite,
    /// Branch domains forget their must-not-be-1 coordinates.
    DroppedNonOnes,
    /// The cascade bound accepts `d = ε` instead of requiring `d < ε`.
    NonStrictEpsilon,
}

impl Fault {
    pub const ALL: [Fault; 3] = [
        Fault::OffByOneRewrite,
        Fault::DroppedNonOnes,
        Fault::NonStrictEpsilon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fault::OffByOneRewrite => "off-by-one-rewrite",
            Fault::DroppedNonOnes => "dropped-non-ones",
            Fault::NonStrictEpsilon => "non-strict-epsilon",
        }
    }
}
