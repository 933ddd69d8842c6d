use crate::error::{Error, Result};
use crate::expr::{Coordinate, MultiIndex};

/// Variable declarations: independent variables `x_1..x_n`, dependent
/// variables `u^1..u^m`, and the fiber coordinates of a covering (if any).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetContext {
    independent: Vec<String>,
    dependent: Vec<String>,
    fibers: Vec<String>,
}

impl JetContext {
    pub fn new<S: AsRef<str>>(independent: &[S], dependent: &[S]) -> Result<Self> {
        Self::with_fibers(independent, dependent, &[] as &[&str])
    }

    pub fn with_fibers<S: AsRef<str>, T: AsRef<str>>(independent: &[S], dependent: &[S], fibers: &[T]) -> Result<Self> {
        let ctx = JetContext {
            independent: independent.iter().map(|s| s.as_ref().trim().to_string()).collect(),
            dependent: dependent.iter().map(|s| s.as_ref().trim().to_string()).collect(),
            fibers: fibers.iter().map(|s| s.as_ref().trim().to_string()).collect(),
        };
        ctx.validate()?;
        Ok(ctx)
    }

    /// The same declarations extended by fiber coordinates.
    pub fn extended<T: AsRef<str>>(&self, fibers: &[T]) -> Result<Self> {
        let mut all: Vec<String> = self.fibers.clone();
        all.extend(fibers.iter().map(|s| s.as_ref().trim().to_string()));
        Self::with_fibers(&self.independent, &self.dependent, &all)
    }

    fn validate(&self) -> Result<()> {
        if self.independent.is_empty() {
            return Err(Error::InvalidContext(
                "at least one independent variable is required".into(),
            ));
        }
        if self.dependent.is_empty() {
            return Err(Error::InvalidContext(
                "at least one dependent variable is required".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in self.all_names() {
            let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && name.chars().all(|c| c.is_ascii_alphanumeric());
            if !valid {
                return Err(Error::InvalidContext(format!("invalid variable name `{name}`")));
            }
            if !seen.insert(name) {
                return Err(Error::InvalidContext(format!("duplicate variable name `{name}`")));
            }
        }
        Ok(())
    }

    fn all_names(&self) -> impl Iterator<Item = &str> {
        self.independent
            .iter()
            .chain(&self.dependent)
            .chain(&self.fibers)
            .map(String::as_str)
    }

    pub fn n_independent(&self) -> usize {
        self.independent.len()
    }

    pub fn n_dependent(&self) -> usize {
        self.dependent.len()
    }

    pub fn n_fibers(&self) -> usize {
        self.fibers.len()
    }

    pub fn independent(&self) -> &[String] {
        &self.independent
    }

    pub fn dependent(&self) -> &[String] {
        &self.dependent
    }

    pub fn fibers(&self) -> &[String] {
        &self.fibers
    }

    pub fn independent_index(&self, name: &str) -> Option<usize> {
        self.independent.iter().position(|s| s == name)
    }

    pub fn dependent_index(&self, name: &str) -> Option<usize> {
        self.dependent.iter().position(|s| s == name)
    }

    pub fn fiber_index(&self, name: &str) -> Option<usize> {
        self.fibers.iter().position(|s| s == name)
    }

    /// `u^j` as a jet coordinate.
    pub fn u(&self, dep: usize) -> Coordinate {
        Coordinate::dependent(dep, self.n_independent())
    }

    /// Jet coordinate with the given exponents.
    pub fn jet(&self, dep: usize, exponents: &[u32]) -> Coordinate {
        assert_eq!(exponents.len(), self.n_independent());
        Coordinate::Jet(dep, MultiIndex::from_slice(exponents))
    }

    /// Whether every coordinate is in range for these declarations.
    pub fn admits(&self, c: &Coordinate) -> bool {
        match c {
            Coordinate::Independent(i) => *i < self.n_independent(),
            Coordinate::Jet(j, s) => *j < self.n_dependent() && s.len() == self.n_independent(),
            Coordinate::Nonlocal(a) => *a < self.n_fibers(),
        }
    }

    /// Render a derivative suffix (`xxt` for `(2,1)` over `(x,t)`).
    pub fn suffix(&self, sigma: &MultiIndex) -> String {
        let mut s = String::new();
        for (i, name) in self.independent.iter().enumerate() {
            for _ in 0..sigma.get(i) {
                s.push_str(name);
            }
        }
        s
    }

    pub(crate) fn single_char_independents(&self) -> bool {
        self.independent.iter().all(|s| s.chars().count() == 1)
    }

    /// Render a coordinate in the expression grammar.
    pub fn coordinate_name(&self, c: &Coordinate) -> String {
        match c {
            Coordinate::Independent(i) => self.independent[*i].clone(),
            Coordinate::Nonlocal(a) => self.fibers[*a].clone(),
            Coordinate::Jet(j, s) => {
                let base = &self.dependent[*j];
                if s.is_zero() {
                    base.clone()
                } else if self.single_char_independents() {
                    format!("{base}_{}", self.suffix(s))
                } else {
                    format!("{base}_{{{}}}", self.suffix(s))
                }
            }
        }
    }

    /// Parse a derivative suffix by longest-match over independent names.
    pub fn parse_suffix(&self, suffix: &str) -> Option<MultiIndex> {
        if suffix.is_empty() {
            return None;
        }
        let mut exps = vec![0u32; self.n_independent()];
        let mut rest = suffix;
        while !rest.is_empty() {
            let (i, len) = self
                .independent
                .iter()
                .enumerate()
                .filter(|(_, name)| rest.starts_with(name.as_str()))
                .map(|(i, name)| (i, name.len()))
                .max_by_key(|&(_, len)| len)?;
            exps[i] += 1;
            rest = &rest[len..];
        }
        Some(MultiIndex::from_slice(&exps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(JetContext::new(&["x", "x"], &["u"]).is_err());
        assert!(JetContext::new(&[] as &[&str], &["u"]).is_err());
        assert!(JetContext::new(&["x"], &[] as &[&str]).is_err());
        assert!(JetContext::new(&["x"], &["u_1"]).is_err());
    }

    #[test]
    fn suffix_round_trip() {
        let ctx = JetContext::new(&["x", "t"], &["u"]).unwrap();
        let s = ctx.parse_suffix("xxt").unwrap();
        assert_eq!(s, MultiIndex::from_slice(&[2, 1]));
        assert_eq!(ctx.suffix(&s), "xxt");
        assert_eq!(ctx.parse_suffix("txx"), Some(s));
        assert_eq!(ctx.parse_suffix("y"), None);
    }
}
