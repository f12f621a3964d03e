//! The locale inheritance tree and the hierarchical resolution walk.

use std::collections::HashMap;

use thiserror::Error;

use crate::symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocaleError {
    #[error("unknown parent locale `{parent}` for `{child}`")]
    UnknownParent { child: Symbol, parent: Symbol },
    #[error("locale `{0}` is already defined")]
    Duplicate(Symbol),
    #[error("locale `{new}` would be a second root (root is `{root}`)")]
    MultipleRoots { root: Symbol, new: Symbol },
    #[error("re-parenting `{child}` under `{parent}` would create a cycle")]
    Cycle { child: Symbol, parent: Symbol },
    #[error("unknown locale `{0}`")]
    UnknownLocale(Symbol),
    #[error("the root locale `{0}` cannot be re-parented")]
    Root(Symbol),
}

/// Exhausting the chain is the only way a well-formed walk fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("unknown locale `{0}`")]
    UnknownLocale(Symbol),
    #[error("No formatter/parser specified.")]
    Exhausted,
}

/// A resolved value and the locale that supplied it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Found<T> {
    pub value: T,
    pub locale: Symbol,
}

/// A rooted parent-pointer tree of jurisdictions.
#[derive(Debug, Clone, Default)]
pub struct LocaleTree {
    parents: HashMap<Symbol, Option<Symbol>>,
    order: Vec<Symbol>,
    root: Option<Symbol>,
}

impl LocaleTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn root(&self) -> Option<&Symbol> {
        self.root.as_ref()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, locale: &str) -> bool {
        self.parents.contains_key(locale)
    }

    pub fn parent(&self, locale: &str) -> Option<&Symbol> {
        self.parents.get(locale).and_then(Option::as_ref)
    }

    /// Locales in definition order.
    pub fn locales(&self) -> &[Symbol] {
        &self.order
    }

    /// Adds the edge `child -> parent`. `None` declares the root.
    pub fn add_locale(&mut self, child: Symbol, parent: Option<Symbol>) -> Result<(), LocaleError> {
        match &parent {
            None => {
                if let Some(root) = &self.root {
                    if *root == child {
                        return Err(LocaleError::Duplicate(child));
                    }
                    return Err(LocaleError::MultipleRoots {
                        root: root.clone(),
                        new: child,
                    });
                }
            }
            Some(p) => {
                if !self.parents.contains_key(p) {
                    return Err(LocaleError::UnknownParent {
                        child,
                        parent: p.clone(),
                    });
                }
            }
        }
        if self.parents.contains_key(&child) {
            return Err(LocaleError::Duplicate(child));
        }
        if parent.is_none() {
            self.root = Some(child.clone());
        }
        self.parents.insert(child.clone(), parent);
        self.order.push(child);
        Ok(())
    }

    /// Hot-patch: moves an existing locale under a new parent.
    pub fn reparent(&mut self, child: &Symbol, parent: Symbol) -> Result<(), LocaleError> {
        if !self.parents.contains_key(child) {
            return Err(LocaleError::UnknownLocale(child.clone()));
        }
        if self.root.as_ref() == Some(child) {
            return Err(LocaleError::Root(child.clone()));
        }
        if !self.parents.contains_key(&parent) {
            return Err(LocaleError::UnknownParent {
                child: child.clone(),
                parent,
            });
        }
        if self.ancestors(&parent).any(|a| a == child) {
            return Err(LocaleError::Cycle {
                child: child.clone(),
                parent,
            });
        }
        self.parents.insert(child.clone(), Some(parent));
        Ok(())
    }

    /// Walks `locale`, its parent, and so on up to the root. Yields nothing
    /// for an unknown locale.
    pub fn ancestors<'a>(&'a self, locale: &'a Symbol) -> impl Iterator<Item = &'a Symbol> + 'a {
        let start = self.parents.get_key_value(locale).map(|(k, _)| k);
        let limit = self.parents.len();
        std::iter::successors(start, move |cur| self.parent(cur)).take(limit)
    }

    pub fn ancestry(&self, locale: &Symbol) -> Result<Vec<Symbol>, LocaleError> {
        if !self.contains(locale) {
            return Err(LocaleError::UnknownLocale(locale.clone()));
        }
        Ok(self.ancestors(locale).cloned().collect())
    }

    /// Returns the first non-empty `probe` result along the ancestry of
    /// `start`, closest locale first.
    pub fn resolve<T>(
        &self,
        start: &Symbol,
        mut probe: impl FnMut(&Symbol) -> Option<T>,
    ) -> Result<Found<T>, ResolveError> {
        if !self.contains(start) {
            return Err(ResolveError::UnknownLocale(start.clone()));
        }
        for locale in self.ancestors(start) {
            if let Some(value) = probe(locale) {
                return Ok(Found {
                    value,
                    locale: locale.clone(),
                });
            }
        }
        Err(ResolveError::Exhausted)
    }

    /// Direct children in definition order.
    pub fn children(&self, locale: &str) -> Vec<&Symbol> {
        self.order
            .iter()
            .filter(|c| self.parent(c).map(Symbol::as_str) == Some(locale))
            .collect()
    }

    /// Depth-first pre-order from the root, paired with depth.
    pub fn depth_first(&self) -> Vec<(usize, &Symbol)> {
        let mut out = Vec::with_capacity(self.order.len());
        let Some(root) = &self.root else {
            return out;
        };
        let mut stack = vec![(0usize, root)];
        while let Some((depth, node)) = stack.pop() {
            out.push((depth, node));
            for child in self.children(node).into_iter().rev() {
                stack.push((depth + 1, child));
            }
        }
        out
    }

    pub fn height(&self) -> usize {
        self.depth_first().iter().map(|(d, _)| *d).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Symbol {
        Symbol::new(s)
    }

    pub(crate) fn listing() -> LocaleTree {
        let mut t = LocaleTree::new();
        t.add_locale(sym("common"), None).unwrap();
        for (child, parent) in [
            ("united-states", "common"),
            ("colorado", "united-states"),
            ("park-county-co", "colorado"),
            ("minnesota", "united-states"),
            ("ramsey-county-mn", "minnesota"),
            ("canada", "common"),
            ("nova-scotia", "canada"),
        ] {
            t.add_locale(sym(child), Some(sym(parent))).unwrap();
        }
        t
    }

    fn names(v: &[Symbol]) -> Vec<&str> {
        v.iter().map(Symbol::as_str).collect()
    }

    #[test]
    fn ancestry_examples() {
        let t = listing();
        assert_eq!(
            names(&t.ancestry(&sym("park-county-co")).unwrap()),
            ["park-county-co", "colorado", "united-states", "common"]
        );
        assert_eq!(
            names(&t.ancestry(&sym("ramsey-county-mn")).unwrap()),
            ["ramsey-county-mn", "minnesota", "united-states", "common"]
        );
        assert_eq!(names(&t.ancestry(&sym("common")).unwrap()), ["common"]);
        assert_eq!(
            t.ancestry(&sym("never-added")),
            Err(LocaleError::UnknownLocale(sym("never-added")))
        );
    }

    #[test]
    fn insertion_preconditions() {
        let mut t = LocaleTree::new();
        t.add_locale(sym("common"), None).unwrap();
        assert!(matches!(
            t.add_locale(sym("nova-scotia"), Some(sym("canada"))),
            Err(LocaleError::UnknownParent { .. })
        ));
        assert!(matches!(
            t.add_locale(sym("x"), Some(sym("x"))),
            Err(LocaleError::UnknownParent { .. })
        ));
        assert!(matches!(
            t.add_locale(sym("other-root"), None),
            Err(LocaleError::MultipleRoots { .. })
        ));
        assert_eq!(t.add_locale(sym("common"), None), Err(LocaleError::Duplicate(sym("common"))));
        t.add_locale(sym("canada"), Some(sym("common"))).unwrap();
        assert_eq!(
            t.add_locale(sym("canada"), Some(sym("common"))),
            Err(LocaleError::Duplicate(sym("canada")))
        );
    }

    #[test]
    fn reparent_rechecks_acyclicity() {
        let mut t = listing();
        assert!(matches!(
            t.reparent(&sym("united-states"), sym("park-county-co")),
            Err(LocaleError::Cycle { .. })
        ));
        assert!(matches!(t.reparent(&sym("common"), sym("canada")), Err(LocaleError::Root(_))));
        t.reparent(&sym("park-county-co"), sym("minnesota")).unwrap();
        assert_eq!(
            names(&t.ancestry(&sym("park-county-co")).unwrap()),
            ["park-county-co", "minnesota", "united-states", "common"]
        );
    }

    #[test]
    fn resolve_short_circuits_and_fails_cleanly() {
        let t = listing();
        let mut visited = Vec::new();
        let hit = t
            .resolve(&sym("park-county-co"), |l| {
                visited.push(l.clone());
                Some(1)
            })
            .unwrap();
        assert_eq!(hit.locale, sym("park-county-co"));
        assert_eq!(visited.len(), 1);

        let root_only = t
            .resolve(&sym("park-county-co"), |l| (l.as_str() == "common").then_some("root"))
            .unwrap();
        assert_eq!(root_only.value, "root");

        let miss = t.resolve(&sym("nova-scotia"), |_| None::<()>).unwrap_err();
        assert_eq!(miss.to_string(), "No formatter/parser specified.");
        assert_eq!(
            t.resolve(&sym("atlantis"), |_| Some(())).unwrap_err(),
            ResolveError::UnknownLocale(sym("atlantis"))
        );
    }

    #[test]
    fn depth_first_follows_definition_order() {
        let t = listing();
        let order: Vec<_> = t.depth_first().into_iter().map(|(d, s)| (d, s.as_str())).collect();
        assert_eq!(
            order,
            [
                (0, "common"),
                (1, "united-states"),
                (2, "colorado"),
                (3, "park-county-co"),
                (2, "minnesota"),
                (3, "ramsey-county-mn"),
                (1, "canada"),
                (2, "nova-scotia"),
            ]
        );
        assert_eq!(t.height(), 3);
    }
}
