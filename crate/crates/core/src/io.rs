//! File formats: observation CSV bundles, scenario CSV bundles and the
//! JSON forms of the core types (which all derive serde).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::empirical::{Observation, WEEK_DAYS};
use crate::error::ModelError;
use crate::model::{ActivityPattern, ScenarioInputs};

/// One row of `observations.csv`: a person-day.
#[derive(Debug, Serialize, Deserialize)]
struct ObservationRow {
    person: u64,
    day: usize,
    delta: u8,
    duration_hr: f64,
    zone: usize,
}

/// One row of `persons.csv`.
#[derive(Debug, Serialize, Deserialize)]
struct PersonRow {
    person: u64,
    home_zone: usize,
    ft_weekday_hr: f64,
    ft_weekend_hr: f64,
}

/// Writes `observations.csv` (one row per person-day) and `persons.csv`
/// (individual attributes) into `dir`.
pub fn write_observations(dir: &Path, observations: &[Observation]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut days = csv::Writer::from_path(dir.join("observations.csv"))?;
    let mut persons = csv::Writer::from_path(dir.join("persons.csv"))?;
    for obs in observations {
        persons.serialize(PersonRow {
            person: obs.person,
            home_zone: obs.home_zone,
            ft_weekday_hr: obs.ft_weekday,
            ft_weekend_hr: obs.ft_weekend,
        })?;
        for t in 0..WEEK_DAYS {
            days.serialize(ObservationRow {
                person: obs.person,
                day: t + 1,
                delta: obs.pattern.delta[t] as u8,
                duration_hr: obs.pattern.durations[t],
                zone: obs.pattern.locations[t],
            })?;
        }
    }
    days.flush()?;
    persons.flush()?;
    Ok(())
}

/// Reads the observation bundle written by [`write_observations`].
pub fn read_observations(dir: &Path) -> Result<Vec<Observation>, std::io::Error> {
    let mut persons = Vec::new();
    let mut reader = csv::Reader::from_path(dir.join("persons.csv"))?;
    for row in reader.deserialize() {
        let row: PersonRow = row?;
        persons.push(Observation {
            person: row.person,
            pattern: ActivityPattern {
                delta: vec![false; WEEK_DAYS],
                durations: vec![0.0; WEEK_DAYS],
                locations: vec![0; WEEK_DAYS],
            },
            home_zone: row.home_zone,
            ft_weekday: row.ft_weekday_hr,
            ft_weekend: row.ft_weekend_hr,
        });
    }
    let mut reader = csv::Reader::from_path(dir.join("observations.csv"))?;
    for row in reader.deserialize() {
        let row: ObservationRow = row?;
        let obs = persons
            .iter_mut()
            .find(|o| o.person == row.person)
            .ok_or_else(|| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("person {} missing from persons.csv", row.person),
                )
            })?;
        if row.day == 0 || row.day > WEEK_DAYS {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("day {} out of range", row.day),
            ));
        }
        obs.pattern.delta[row.day - 1] = row.delta == 1;
        obs.pattern.durations[row.day - 1] = row.duration_hr;
        obs.pattern.locations[row.day - 1] = row.zone;
    }
    Ok(persons)
}

/// Writes a [`ScenarioInputs`] as a CSV bundle: one file per matrix
/// (rows = locations, columns = days), one for the free-time vector and
/// one for the size measures.
pub fn write_scenario_csv(dir: &Path, inputs: &ScenarioInputs) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let write_matrix = |name: &str, matrix: &[Vec<f64>]| -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        let days = matrix.first().map_or(0, |r| r.len());
        let mut header = vec!["location".to_string()];
        header.extend((1..=days).map(|d| format!("day{d}")));
        w.write_record(&header)?;
        for (loc, row) in matrix.iter().enumerate() {
            let mut record = vec![inputs.locations[loc].clone()];
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    };
    write_matrix("attractiveness.csv", &inputs.attractiveness)?;
    write_matrix("travel_time.csv", &inputs.travel_time)?;
    write_matrix("travel_cost.csv", &inputs.travel_cost)?;

    let mut w = csv::Writer::from_path(dir.join("free_time.csv"))?;
    w.write_record(["day", "hours"])?;
    for (t, ft) in inputs.free_time.iter().enumerate() {
        w.write_record([format!("{}", t + 1), ft.to_string()])?;
    }
    w.flush()?;

    if !inputs.size_measures.is_empty() {
        let mut w = csv::Writer::from_path(dir.join("size_measures.csv"))?;
        let mut header = vec!["location".to_string()];
        header.extend(inputs.measure_names.iter().cloned());
        w.write_record(&header)?;
        for (loc, row) in inputs.size_measures.iter().enumerate() {
            let mut record = vec![inputs.locations[loc].clone()];
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Reads the bundle written by [`write_scenario_csv`].
pub fn read_scenario_csv(dir: &Path) -> Result<ScenarioInputs, std::io::Error> {
    let read_matrix = |name: &str| -> Result<(Vec<String>, Vec<Vec<f64>>), std::io::Error> {
        let mut reader = csv::Reader::from_path(dir.join(name))?;
        let mut locations = Vec::new();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let mut fields = record.iter();
            locations.push(fields.next().unwrap_or_default().to_string());
            let row: Result<Vec<f64>, _> = fields.map(|f| f.parse::<f64>()).collect();
            rows.push(row.map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
            })?);
        }
        Ok((locations, rows))
    };
    let (locations, attractiveness) = read_matrix("attractiveness.csv")?;
    let (_, travel_time) = read_matrix("travel_time.csv")?;
    let (_, travel_cost) = read_matrix("travel_cost.csv")?;

    let mut free_time = Vec::new();
    let mut reader = csv::Reader::from_path(dir.join("free_time.csv"))?;
    for record in reader.records() {
        let record = record?;
        let ft: f64 = record
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|e: std::num::ParseFloatError| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
            })?;
        free_time.push(ft);
    }

    let mut size_measures = Vec::new();
    let mut measure_names = Vec::new();
    let size_path = dir.join("size_measures.csv");
    if size_path.exists() {
        let mut reader = csv::Reader::from_path(size_path)?;
        measure_names = reader
            .headers()?
            .iter()
            .skip(1)
            .map(|s| s.to_string())
            .collect();
        for record in reader.records() {
            let record = record?;
            let row: Result<Vec<f64>, _> = record.iter().skip(1).map(|f| f.parse::<f64>()).collect();
            size_measures.push(row.map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
            })?);
        }
    }

    Ok(ScenarioInputs {
        locations,
        attractiveness,
        travel_time,
        travel_cost,
        free_time,
        size_measures,
        measure_names,
    })
}

/// Serializes any of the crate's report types to pretty JSON.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report")
}

/// Parses a JSON document into one of the crate's types.
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ModelError> {
    serde_json::from_str(text).map_err(|e| ModelError::domain("json", e.to_string()))
}
