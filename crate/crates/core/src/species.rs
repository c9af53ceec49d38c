//! Dense identifiers and the species bit-set used as the label of every node.

use std::fmt;

use fixedbitset::FixedBitSet;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub(crate) u32);

        impl $name {
            pub fn new(index: usize) -> Self {
                Self(u32::try_from(index).expect("id overflow"))
            }

            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(&self.0, f)
            }
        }
    };
}

dense_id!(
    /// A declared type, numbered in name order.
    TypeId
);
dense_id!(
    /// A species (maximally specific type), numbered in name order.
    SpeciesId
);
dense_id!(
    /// A feature, numbered in name order.
    FeatureId
);
dense_id!(
    /// A node of a [`FeatureGraph`](crate::FeatureGraph).
    NodeId
);

/// A set of species over a fixed universe (the species of one signature).
///
/// Two sets are only comparable when they were created for the same
/// signature; the universe size is part of equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpeciesSet(FixedBitSet);

impl SpeciesSet {
    pub fn empty(universe: usize) -> Self {
        SpeciesSet(FixedBitSet::with_capacity(universe))
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        SpeciesSet(bits)
    }

    pub fn singleton(universe: usize, species: SpeciesId) -> Self {
        let mut set = Self::empty(universe);
        set.insert(species);
        set
    }

    pub fn from_iter_in(universe: usize, species: impl IntoIterator<Item = SpeciesId>) -> Self {
        let mut set = Self::empty(universe);
        for s in species {
            set.insert(s);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, species: SpeciesId) {
        self.0.insert(species.index());
    }

    pub fn remove(&mut self, species: SpeciesId) {
        self.0.set(species.index(), false);
    }

    pub fn contains(&self, species: SpeciesId) -> bool {
        self.0.contains(species.index())
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    /// The only member, if the set is a singleton.
    pub fn as_singleton(&self) -> Option<SpeciesId> {
        let mut ones = self.0.ones();
        match (ones.next(), ones.next()) {
            (Some(s), None) => Some(SpeciesId::new(s)),
            _ => None,
        }
    }

    pub fn is_subset(&self, other: &SpeciesSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &SpeciesSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersection(&self, other: &SpeciesSet) -> SpeciesSet {
        let mut out = self.clone();
        out.0.intersect_with(&other.0);
        out
    }

    pub fn union(&self, other: &SpeciesSet) -> SpeciesSet {
        let mut out = self.clone();
        out.0.union_with(&other.0);
        out
    }

    /// Members in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = SpeciesId> + '_ {
        self.0.ones().map(SpeciesId::new)
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.0
    }
}

impl fmt::Debug for SpeciesSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}
