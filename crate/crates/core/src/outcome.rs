use serde::Serialize;

/// Result of a question that a finite prefix may not settle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome<T> {
    Yes(T),
    No,
    Unknown,
}

impl<T> Outcome<T> {
    pub fn is_yes(&self) -> bool {
        matches!(self, Outcome::Yes(_))
    }

    pub fn yes(self) -> Option<T> {
        match self {
            Outcome::Yes(v) => Some(v),
            _ => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        match self {
            Outcome::Yes(v) => Outcome::Yes(f(v)),
            Outcome::No => Outcome::No,
            Outcome::Unknown => Outcome::Unknown,
        }
    }
}
