use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Which generation pool a category belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    FireFlood,
    Wind,
    Container,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectCategory {
    pub name: String,
    pub pool: Pool,
    /// Points; strictly positive.
    pub value: f64,
    pub waterproof: bool,
    /// Degrees Celsius.
    pub ignition_point: f64,
    /// Frames spent burning before the object is burnt.
    pub burn_duration: u64,
    /// kg/m³.
    pub density: f64,
    pub drag_coefficient: f64,
    pub wind_susceptible: bool,
    /// Default box size used when generating instances.
    pub half_extents: Vec3,
}

impl ObjectCategory {
    pub fn validate(&self, room_temperature: f64) -> Result<()> {
        let field = |f: &str| format!("categories[{}].{f}", self.name);
        if self.name.is_empty() {
            return Err(Error::schema("categories[].name", "empty name"));
        }
        if !(self.value > 0.0 && self.value.is_finite()) {
            return Err(Error::schema(field("value"), "must be > 0"));
        }
        if !(self.ignition_point > room_temperature) {
            return Err(Error::schema(field("ignition_point"), "must exceed room temperature"));
        }
        if self.burn_duration == 0 {
            return Err(Error::schema(field("burn_duration"), "must be > 0"));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::schema(field("density"), "must be > 0"));
        }
        if !(self.drag_coefficient > 0.0 && self.drag_coefficient.is_finite()) {
            return Err(Error::schema(field("drag_coefficient"), "must be > 0"));
        }
        let h = self.half_extents;
        if !(h.x > 0.0 && h.y > 0.0 && h.z > 0.0 && h.is_finite()) {
            return Err(Error::schema(field("half_extents"), "must be strictly positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct PoolFile {
    #[serde(default)]
    note: Option<String>,
    categories: Vec<ObjectCategory>,
}

/// The category table, keyed by unique name.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryPool {
    by_name: BTreeMap<String, ObjectCategory>,
}

const BUILTIN: &str = include_str!("../../data/categories.json");

impl CategoryPool {
    /// The shipped stand-in table: 22 fire/flood categories, 11 wind
    /// categories and the shopping-cart container.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("builtin category table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: PoolFile =
            serde_json::from_str(text).map_err(|e| Error::schema("categories", e.to_string()))?;
        Self::from_categories(file.categories)
    }

    pub fn from_categories(cats: Vec<ObjectCategory>) -> Result<Self> {
        let mut by_name = BTreeMap::new();
        for c in cats {
            c.validate(crate::fire::FireParams::default().room_temperature)?;
            let name = c.name.clone();
            if by_name.insert(name.clone(), c).is_some() {
                return Err(Error::schema("categories[].name", format!("duplicate `{name}`")));
            }
        }
        Ok(Self { by_name })
    }

    pub fn get(&self, name: &str) -> Option<&ObjectCategory> {
        self.by_name.get(name)
    }

    /// Categories of one pool in name order.
    pub fn pool(&self, pool: Pool) -> Vec<&ObjectCategory> {
        self.by_name.values().filter(|c| c.pool == pool).collect()
    }

    pub fn max_ignition_point(&self) -> f64 {
        self.by_name.values().map(|c| c.ignition_point).fold(f64::MIN, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ObjectCategory> {
        self.by_name.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_pool_sizes() {
        let p = CategoryPool::builtin();
        assert_eq!(p.pool(Pool::FireFlood).len(), 22);
        assert_eq!(p.pool(Pool::Wind).len(), 11);
        assert!(p.get("shopping_cart").is_some());
    }

    #[test]
    fn builtin_ignition_below_flame_temperature() {
        let p = CategoryPool::builtin();
        assert!(p.max_ignition_point() < crate::fire::FireParams::default().flame_temperature);
    }

    #[test]
    fn rejects_non_positive_value() {
        let mut c = CategoryPool::builtin().get("laptop").unwrap().clone();
        c.value = 0.0;
        let err = CategoryPool::from_categories(vec![c]).unwrap_err();
        assert!(err.to_string().contains("value"));
    }
}
