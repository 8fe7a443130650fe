use std::collections::{BTreeMap, BTreeSet};

use crate::types::LinkId;

/// Links known to be cut, bucketed by hop distance from the owning node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SwitchedOffMatrix {
    rows: BTreeMap<u32, BTreeSet<LinkId>>,
    row_of: BTreeMap<LinkId, u32>,
}

impl SwitchedOffMatrix {
    /// Files `link` under `row`, moving it if it was filed elsewhere.
    pub fn insert(&mut self, link: LinkId, row: u32) {
        self.remove(link);
        self.rows.entry(row).or_default().insert(link);
        self.row_of.insert(link, row);
    }

    pub fn remove(&mut self, link: LinkId) -> Option<u32> {
        let row = self.row_of.remove(&link)?;
        let set = self.rows.get_mut(&row).expect("row index is consistent");
        set.remove(&link);
        if set.is_empty() {
            self.rows.remove(&row);
        }
        Some(row)
    }

    pub fn row_of(&self, link: LinkId) -> Option<u32> {
        self.row_of.get(&link).copied()
    }

    /// Smallest non-empty row index that is at least `start`.
    pub fn first_non_empty_from(&self, start: u32) -> Option<u32> {
        self.rows.range(start..).next().map(|(r, _)| *r)
    }

    pub fn row(&self, row: u32) -> impl Iterator<Item = LinkId> + '_ {
        self.rows.get(&row).into_iter().flatten().copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = (u32, &BTreeSet<LinkId>)> {
        self.rows.iter().map(|(r, s)| (*r, s))
    }

    pub fn contains(&self, link: LinkId) -> bool {
        self.row_of.contains_key(&link)
    }

    pub fn len(&self) -> usize {
        self.row_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_of.is_empty()
    }

    pub fn clear(&mut self) {
        self.rows.clear();
        self.row_of.clear();
    }
}
