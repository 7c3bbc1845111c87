use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A visit class, stored as an index into its [`LabelScheme`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(pub(crate) u16);

impl Label {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered set of class names plus the class treated as positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelScheme {
    classes: Vec<String>,
    positive: usize,
}

impl LabelScheme {
    pub fn new<S: Into<String>>(classes: impl IntoIterator<Item = S>, positive: &str) -> Result<Self> {
        let classes: Vec<String> = classes.into_iter().map(Into::into).collect();
        if classes.len() < 2 {
            return Err(Error::invalid("a label scheme needs at least two classes"));
        }
        if classes.len() > u16::MAX as usize {
            return Err(Error::invalid("too many classes"));
        }
        for (i, c) in classes.iter().enumerate() {
            if c.trim().is_empty() {
                return Err(Error::invalid("empty class name"));
            }
            if classes[..i].iter().any(|o| normalize(o) == normalize(c)) {
                return Err(Error::invalid(format!("duplicate class `{c}`")));
            }
        }
        let positive = classes
            .iter()
            .position(|c| normalize(c) == normalize(positive))
            .ok_or_else(|| Error::invalid(format!("positive class `{positive}` not in scheme")))?;
        Ok(Self { classes, positive })
    }

    /// `{Wellness, Other}` with Wellness positive.
    pub fn binary() -> Self {
        Self::new(["Wellness", "Other"], "Wellness").expect("static scheme")
    }

    /// The five-class visit scheme; Wellness positive.
    pub fn extended() -> Self {
        Self::new(
            ["Wellness", "NonWellness", "Boarding", "Grooming", "Retail"],
            "Wellness",
        )
        .expect("static scheme")
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn positive(&self) -> Label {
        Label(self.positive as u16)
    }

    pub fn is_positive(&self, label: Label) -> bool {
        label.index() == self.positive
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.classes.len()).map(|i| Label(i as u16))
    }

    pub fn name(&self, label: Label) -> &str {
        &self.classes[label.index()]
    }

    pub fn label(&self, index: usize) -> Option<Label> {
        (index < self.classes.len()).then_some(Label(index as u16))
    }

    /// Case-insensitive lookup; surrounding whitespace is ignored.
    pub fn parse(&self, raw: &str) -> Result<Label> {
        let key = normalize(raw);
        self.classes
            .iter()
            .position(|c| normalize(c) == key)
            .map(|i| Label(i as u16))
            .ok_or_else(|| Error::UnknownLabel {
                label: raw.trim().to_string(),
                admitted: self.classes.join(", "),
            })
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.classes.join(", "))
    }
}

fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_scheme_parses_case_insensitively() {
        let s = LabelScheme::binary();
        assert_eq!(s.parse("  WELLNESS ").unwrap(), s.positive());
        assert_eq!(s.name(s.parse("other").unwrap()), "Other");
        assert!(matches!(s.parse("boarding"), Err(Error::UnknownLabel { .. })));
    }

    #[test]
    fn extended_scheme_has_five_classes() {
        let s = LabelScheme::extended();
        assert_eq!(s.len(), 5);
        assert_eq!(s.name(s.parse("nonwellness").unwrap()), "NonWellness");
        assert!(s.is_positive(s.parse("Wellness").unwrap()));
    }

    #[test]
    fn rejects_bad_schemes() {
        assert!(LabelScheme::new(["a"], "a").is_err());
        assert!(LabelScheme::new(["a", "A"], "a").is_err());
        assert!(LabelScheme::new(["a", "b"], "c").is_err());
    }
}
