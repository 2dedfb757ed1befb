use std::collections::BTreeMap;

use super::{table_key, Domain, EndogenousVar, ExogenousVar, Scm, ScmError};

/// Incremental construction of an [`Scm`].
///
/// [`endogenous_fn`](Self::endogenous_fn) enumerates the parent domains to
/// fill the table, so its parents must be declared earlier. The first error
/// encountered is reported by [`build`](Self::build).
#[derive(Debug, Default)]
pub struct ScmBuilder {
    exogenous: Vec<ExogenousVar>,
    endogenous: Vec<EndogenousVar>,
    error: Option<ScmError>,
}

impl ScmBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn domain<I, S>(&mut self, var: &str, values: I) -> Option<Domain>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        match Domain::new(values) {
            Ok(d) => Some(d),
            Err(reason) => {
                self.error.get_or_insert(ScmError::InvalidDomain { var: var.into(), reason });
                None
            }
        }
    }

    pub fn exogenous<I, S, P>(mut self, id: &str, values: I, probs: P) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = f64>,
    {
        if let Some(values) = self.domain(id, values) {
            self.exogenous.push(ExogenousVar { id: id.into(), values, probs: probs.into_iter().collect() });
        }
        self
    }

    /// Adds an endogenous variable with an explicit table.
    pub fn endogenous_table<I, S, P, Q, T, K, V>(mut self, id: &str, values: I, parents: P, table: T) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = Q>,
        Q: Into<String>,
        T: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        if let Some(values) = self.domain(id, values) {
            self.endogenous.push(EndogenousVar {
                id: id.into(),
                values,
                parents: parents.into_iter().map(Into::into).collect(),
                table: table.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            });
        }
        self
    }

    /// Adds an endogenous variable whose table is produced by `f` over every
    /// combination of parent values.
    pub fn endogenous_fn<I, S, P, Q, F>(mut self, id: &str, values: I, parents: P, f: F) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = Q>,
        Q: Into<String>,
        F: Fn(&[&str]) -> String,
    {
        let Some(values) = self.domain(id, values) else {
            return self;
        };
        let parents: Vec<String> = parents.into_iter().map(Into::into).collect();
        let mut domains = Vec::with_capacity(parents.len());
        for p in &parents {
            let found = self
                .exogenous
                .iter()
                .map(|v| (&v.id, &v.values))
                .chain(self.endogenous.iter().map(|v| (&v.id, &v.values)))
                .find(|(vid, _)| *vid == p)
                .map(|(_, d)| d.clone());
            match found {
                Some(d) => domains.push(d),
                None => {
                    self.error.get_or_insert(ScmError::DanglingParent { var: id.into(), parent: p.clone() });
                    return self;
                }
            }
        }
        let table = tabulate(&domains, f);
        self.endogenous.push(EndogenousVar { id: id.into(), values, parents, table });
        self
    }

    pub fn build(self) -> Result<Scm, ScmError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        Scm::new(self.exogenous, self.endogenous)
    }
}

/// Builds a full mechanism table by evaluating `f` on every parent tuple.
pub(crate) fn tabulate<F>(domains: &[Domain], f: F) -> BTreeMap<String, String>
where
    F: Fn(&[&str]) -> String,
{
    let mut table = BTreeMap::new();
    let mut idx = vec![0usize; domains.len()];
    loop {
        let tuple: Vec<&str> = idx.iter().zip(domains).map(|(&i, d)| d.values()[i].as_str()).collect();
        table.insert(table_key(&tuple), f(&tuple));
        // odometer increment, last position fastest
        let mut pos = domains.len();
        loop {
            if pos == 0 {
                return table;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < domains[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}
