use std::fmt::Write;

use super::{Hierarchy, TypeId};

impl Hierarchy {
    fn names(&self, ids: &[TypeId]) -> String {
        if ids.is_empty() {
            return "-".into();
        }
        let mut v: Vec<&str> = ids.iter().map(|&i| &*self.entries[i].name).collect();
        v.sort_unstable();
        v.join(",")
    }

    /// One line per live type, in creation order:
    /// `name kind code parents alternatives incompatible-sets`, separated by
    /// tabs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in self.ids() {
            let e = &self.entries[t];
            let sets = self.incompatible_sets(t);
            let incompat = if sets.is_empty() {
                "-".to_string()
            } else {
                sets.iter().map(|s| format!("{{{}}}", self.names(s))).collect::<Vec<_>>().join(" ")
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                e.name,
                e.kind_label(),
                self.codes[t].to_hex(),
                self.names(&e.conj_parents),
                self.names(&e.disj_alts),
                incompat
            );
        }
        out
    }
}
