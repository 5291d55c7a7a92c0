//! Identifiers for generation technologies and regions, plus fixed-size
//! containers keyed by them.
//!
//! Everything here is array-backed so that iteration order is the declaration
//! order of the enums — never a hash order — which keeps every downstream
//! artifact (observations, CSV rows, dispatch tie-breaks) reproducible.

use std::fmt;
use std::ops::{Index, IndexMut};

/// Number of modelled generation technologies.
pub const N_TECH: usize = 8;
/// Number of modelled regions.
pub const N_REGIONS: usize = 2;
/// Length of an investment action vector: one entry per (region, technology).
pub const N_ACTIONS: usize = N_REGIONS * N_TECH;

/// A generation technology. The numeric value doubles as the canonical
/// ordering used for dispatch tie-breaks and for flattening per-technology
/// data into vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(usize)]
pub enum Technology {
    Coal = 0,
    Ccgt = 1,
    Oil = 2,
    Nuclear = 3,
    OnshoreWind = 4,
    OffshoreWind = 5,
    SolarPv = 6,
    Wave = 7,
}

impl Technology {
    /// All technologies, in canonical order.
    pub const ALL: [Technology; N_TECH] = [
        Technology::Coal,
        Technology::Ccgt,
        Technology::Oil,
        Technology::Nuclear,
        Technology::OnshoreWind,
        Technology::OffshoreWind,
        Technology::SolarPv,
        Technology::Wave,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Technology> {
        Technology::ALL.get(i).copied()
    }

    /// Stable text key, used in scenario files and CSV output.
    pub fn key(self) -> &'static str {
        match self {
            Technology::Coal => "coal",
            Technology::Ccgt => "ccgt",
            Technology::Oil => "oil",
            Technology::Nuclear => "nuclear",
            Technology::OnshoreWind => "onshore-wind",
            Technology::OffshoreWind => "offshore-wind",
            Technology::SolarPv => "solar-pv",
            Technology::Wave => "wave",
        }
    }

    pub fn from_key(key: &str) -> Option<Technology> {
        Technology::ALL.into_iter().find(|t| t.key() == key)
    }

    /// Zero-emission renewables (no fuel, no combustion CO2).
    pub fn is_renewable(self) -> bool {
        matches!(
            self,
            Technology::OnshoreWind
                | Technology::OffshoreWind
                | Technology::SolarPv
                | Technology::Wave
        )
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A modelled region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(usize)]
pub enum Region {
    Uk = 0,
    Ie = 1,
}

impl Region {
    pub const ALL: [Region; N_REGIONS] = [Region::Uk, Region::Ie];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Region> {
        Region::ALL.get(i).copied()
    }

    pub fn key(self) -> &'static str {
        match self {
            Region::Uk => "UK",
            Region::Ie => "IE",
        }
    }

    pub fn from_key(key: &str) -> Option<Region> {
        Region::ALL.into_iter().find(|r| r.key() == key)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A value per technology, indexable by [`Technology`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerTech<T>(pub [T; N_TECH]);

impl<T> PerTech<T> {
    pub fn from_fn(mut f: impl FnMut(Technology) -> T) -> Self {
        PerTech(Technology::ALL.map(|t| f(t)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Technology, &T)> {
        Technology::ALL.iter().copied().zip(self.0.iter())
    }
}

impl<T: Copy> PerTech<T> {
    pub fn splat(v: T) -> Self {
        PerTech([v; N_TECH])
    }
}

impl PerTech<f64> {
    pub fn zeros() -> Self {
        PerTech([0.0; N_TECH])
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl<T> Index<Technology> for PerTech<T> {
    type Output = T;
    #[inline]
    fn index(&self, t: Technology) -> &T {
        &self.0[t.index()]
    }
}

impl<T> IndexMut<Technology> for PerTech<T> {
    #[inline]
    fn index_mut(&mut self, t: Technology) -> &mut T {
        &mut self.0[t.index()]
    }
}

/// A value per region, indexable by [`Region`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerRegion<T>(pub [T; N_REGIONS]);

impl<T> PerRegion<T> {
    pub fn from_fn(mut f: impl FnMut(Region) -> T) -> Self {
        PerRegion(Region::ALL.map(|r| f(r)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Region, &T)> {
        Region::ALL.iter().copied().zip(self.0.iter())
    }
}

impl<T: Copy> PerRegion<T> {
    pub fn splat(v: T) -> Self {
        PerRegion([v; N_REGIONS])
    }
}

impl PerRegion<f64> {
    pub fn zeros() -> Self {
        PerRegion([0.0; N_REGIONS])
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl<T> Index<Region> for PerRegion<T> {
    type Output = T;
    #[inline]
    fn index(&self, r: Region) -> &T {
        &self.0[r.index()]
    }
}

impl<T> IndexMut<Region> for PerRegion<T> {
    #[inline]
    fn index_mut(&mut self, r: Region) -> &mut T {
        &mut self.0[r.index()]
    }
}

/// A value per (region, technology) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerRegionTech<T>(pub PerRegion<PerTech<T>>);

impl<T> PerRegionTech<T> {
    pub fn from_fn(mut f: impl FnMut(Region, Technology) -> T) -> Self {
        PerRegionTech(PerRegion::from_fn(|r| PerTech::from_fn(|t| f(r, t))))
    }

    /// Iterate in canonical order: region-major, technology-minor.
    pub fn iter(&self) -> impl Iterator<Item = (Region, Technology, &T)> {
        Region::ALL.iter().flat_map(move |&r| {
            Technology::ALL
                .iter()
                .map(move |&t| (r, t, &self.0[r][t]))
        })
    }
}

impl<T: Copy> PerRegionTech<T> {
    pub fn splat(v: T) -> Self {
        PerRegionTech(PerRegion::splat(PerTech::splat(v)))
    }
}

impl PerRegionTech<f64> {
    pub fn zeros() -> Self {
        PerRegionTech::splat(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.0 .0.iter().map(|p| p.sum()).sum()
    }

    /// Sum over regions for one technology.
    pub fn tech_total(&self, t: Technology) -> f64 {
        Region::ALL.iter().map(|&r| self.0[r][t]).sum()
    }

    /// Flatten to a region-major vector of length [`N_ACTIONS`].
    pub fn flatten(&self) -> [f64; N_ACTIONS] {
        let mut out = [0.0; N_ACTIONS];
        for (r, t, &v) in self.iter() {
            out[r.index() * N_TECH + t.index()] = v;
        }
        out
    }
}

impl<T> Index<(Region, Technology)> for PerRegionTech<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, t): (Region, Technology)) -> &T {
        &self.0[r][t]
    }
}

impl<T> IndexMut<(Region, Technology)> for PerRegionTech<T> {
    #[inline]
    fn index_mut(&mut self, (r, t): (Region, Technology)) -> &mut T {
        &mut self.0[r][t]
    }
}

impl<T> Index<Region> for PerRegionTech<T> {
    type Output = PerTech<T>;
    #[inline]
    fn index(&self, r: Region) -> &PerTech<T> {
        &self.0[r]
    }
}

impl<T> IndexMut<Region> for PerRegionTech<T> {
    #[inline]
    fn index_mut(&mut self, r: Region) -> &mut PerTech<T> {
        &mut self.0[r]
    }
}
