//! Pet demographics: life-stage assignment and per-species cohort summaries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resample::quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Canine,
    Feline,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::Canine, Species::Feline];

    pub fn as_str(self) -> &'static str {
        match self {
            Species::Canine => "canine",
            Species::Feline => "feline",
        }
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "canine" | "dog" => Ok(Species::Canine),
            "feline" | "cat" => Ok(Species::Feline),
            other => Err(Error::invalid(format!("unknown species `{other}`"))),
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    FemaleSpayed,
    Male,
    MaleNeutered,
    Unknown,
}

impl Sex {
    pub const ALL: [Sex; 5] = [
        Sex::Female,
        Sex::FemaleSpayed,
        Sex::Male,
        Sex::MaleNeutered,
        Sex::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::FemaleSpayed => "female_spayed",
            Sex::Male => "male",
            Sex::MaleNeutered => "male_neutered",
            Sex::Unknown => "unknown",
        }
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_lowercase();
        Sex::ALL
            .into_iter()
            .find(|x| x.as_str() == key)
            .ok_or_else(|| Error::invalid(format!("unknown sex `{key}`")))
    }
}

/// Ordered life stages; `Unknown` sorts last and is only produced for a missing age.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifeStage {
    Juvenile,
    YoungAdult,
    MatureAdult,
    Senior,
    Geriatric,
    Unknown,
}

impl LifeStage {
    pub const ALL: [LifeStage; 6] = [
        LifeStage::Juvenile,
        LifeStage::YoungAdult,
        LifeStage::MatureAdult,
        LifeStage::Senior,
        LifeStage::Geriatric,
        LifeStage::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LifeStage::Juvenile => "juvenile",
            LifeStage::YoungAdult => "young_adult",
            LifeStage::MatureAdult => "mature_adult",
            LifeStage::Senior => "senior",
            LifeStage::Geriatric => "geriatric",
            LifeStage::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetRecord {
    pub visit_id: String,
    pub species: Species,
    pub sex: Sex,
    pub age_years: Option<f64>,
}

// Upper bounds (inclusive) of juvenile, young adult, mature adult and senior.
const CANINE_BOUNDS: [f64; 4] = [1.0, 4.0, 7.0, 10.0];
const FELINE_BOUNDS: [f64; 4] = [1.0, 2.0, 10.0, 15.0];

/// Stage intervals are right-closed: an age exactly on a boundary belongs to
/// the younger stage.
pub fn life_stage(species: Species, age_years: Option<f64>) -> Result<LifeStage> {
    let Some(age) = age_years else {
        return Ok(LifeStage::Unknown);
    };
    if !(age.is_finite() && age >= 0.0) {
        return Err(Error::invalid(format!("age must be a nonnegative number, got {age}")));
    }
    let bounds = match species {
        Species::Canine => CANINE_BOUNDS,
        Species::Feline => FELINE_BOUNDS,
    };
    let stage = match bounds.iter().position(|&b| age <= b) {
        Some(0) => LifeStage::Juvenile,
        Some(1) => LifeStage::YoungAdult,
        Some(2) => LifeStage::MatureAdult,
        Some(_) => LifeStage::Senior,
        None => LifeStage::Geriatric,
    };
    Ok(stage)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetCount {
    pub category: String,
    pub count: usize,
    /// Percentage of the species total; absent when the total is zero.
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSummary {
    pub species: Species,
    pub count: usize,
    pub percent_of_total: Option<f64>,
    pub sex: Vec<FacetCount>,
    pub life_stage: Vec<FacetCount>,
    pub age_median: Option<f64>,
    pub age_q1: Option<f64>,
    pub age_q3: Option<f64>,
    pub age_missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortReport {
    pub total: usize,
    pub species: Vec<SpeciesSummary>,
}

fn percent(count: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| 100.0 * count as f64 / total as f64)
}

/// Counts and percentages per species by sex and life stage, plus age
/// median and quartiles. Pets without an age count toward species totals.
pub fn cohort_summary(pets: &[PetRecord]) -> Result<CohortReport> {
    let total = pets.len();
    let mut species = Vec::with_capacity(2);
    for sp in Species::ALL {
        let group: Vec<&PetRecord> = pets.iter().filter(|p| p.species == sp).collect();
        let n = group.len();

        let sex = Sex::ALL
            .iter()
            .map(|&s| {
                let count = group.iter().filter(|p| p.sex == s).count();
                FacetCount {
                    category: s.as_str().to_string(),
                    count,
                    percent: percent(count, n),
                }
            })
            .collect();

        let mut stage_counts = [0usize; 6];
        for p in &group {
            let stage = life_stage(sp, p.age_years)?;
            stage_counts[stage as usize] += 1;
        }
        let life_stage = LifeStage::ALL
            .iter()
            .zip(stage_counts)
            .map(|(s, count)| FacetCount {
                category: s.as_str().to_string(),
                count,
                percent: percent(count, n),
            })
            .collect();

        let ages: Vec<f64> = group.iter().filter_map(|p| p.age_years).collect();
        let q = |p: f64| quantile(&ages, p).ok();
        species.push(SpeciesSummary {
            species: sp,
            count: n,
            percent_of_total: percent(n, total),
            sex,
            life_stage,
            age_median: q(0.5),
            age_q1: q(0.25),
            age_q3: q(0.75),
            age_missing: n - ages.len(),
        });
    }
    Ok(CohortReport { total, species })
}
