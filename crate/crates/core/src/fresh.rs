use std::collections::HashSet;

/// Deterministic fresh names `stem$k` from one monotone counter.
#[derive(Debug, Clone, Default)]
pub struct Fresh {
    taken: HashSet<String>,
    counter: usize,
}

impl Fresh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoiding<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut f = Fresh::new();
        f.reserve(names);
        f
    }

    pub fn reserve<I, S>(&mut self, names: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.taken.extend(names.into_iter().map(Into::into));
    }

    /// A name never returned before and not reserved; `$` suffixes of the
    /// base are dropped so repeated freshening does not grow names.
    pub fn name(&mut self, base: &str) -> String {
        let stem = base.split('$').next().filter(|s| !s.is_empty()).unwrap_or("v");
        loop {
            self.counter += 1;
            let candidate = format!("{stem}${}", self.counter);
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}
