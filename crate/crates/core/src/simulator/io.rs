use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::capacity::CapacitySchedule;
use super::census::{CensusState, DayFlows, UNITS};
use super::training::PatientTrace;
use crate::error::{invalid, Error, Result};
use crate::uncertainty::DemandPath;

/// One value of a long-format CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongRecord {
    pub path_id: usize,
    pub location: usize,
    pub day: i64,
    pub value: f64,
}

/// Writes paths in long format; `first_day` labels the first entry.
pub fn write_demand_csv<W: Write>(writer: W, paths: &[DemandPath], first_day: i64) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (path_id, p) in paths.iter().enumerate() {
        for location in 0..p.locations() {
            for t in 0..p.horizon() {
                w.serialize(LongRecord { path_id, location, day: first_day + t as i64, value: p.get(t, location) })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_long<R: Read>(reader: R) -> Result<BTreeMap<usize, BTreeMap<i64, BTreeMap<usize, f64>>>> {
    let mut out: BTreeMap<usize, BTreeMap<i64, BTreeMap<usize, f64>>> = BTreeMap::new();
    for rec in csv::Reader::from_reader(reader).deserialize() {
        let r: LongRecord = rec?;
        if out.entry(r.path_id).or_default().entry(r.day).or_default().insert(r.location, r.value).is_some() {
            return Err(invalid(format!("duplicate entry for path {} day {} location {}", r.path_id, r.day, r.location)));
        }
    }
    Ok(out)
}

/// Reads paths written by [`write_demand_csv`], ordered by `path_id`.
pub fn read_demand_csv<R: Read>(reader: R) -> Result<Vec<DemandPath>> {
    let mut paths = Vec::new();
    for (id, days) in read_long(reader)? {
        let rows: Vec<Vec<f64>> = days.into_values().map(|locs| locs.into_values().collect()).collect();
        paths.push(DemandPath::new(rows).map_err(|e| e.context(format!("path {id}")))?);
    }
    Ok(paths)
}

/// Capacity in the same long format, one row per day of each week.
pub fn write_capacity_csv<W: Write>(writer: W, schedules: &[CapacitySchedule], period: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (path_id, s) in schedules.iter().enumerate() {
        for location in 0..s.weekly.first().map_or(0, Vec::len) {
            for (wk, caps) in s.weekly.iter().enumerate() {
                for d in 0..period {
                    let day = (wk * period + d + 1) as i64;
                    w.serialize(LongRecord { path_id, location, day, value: caps[location] as f64 })?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_capacity_csv<R: Read>(reader: R, period: usize) -> Result<Vec<CapacitySchedule>> {
    let mut out = Vec::new();
    for (_, days) in read_long(reader)? {
        let weekly = days
            .iter()
            .filter(|(day, _)| (**day - 1).rem_euclid(period as i64) == 0)
            .map(|(_, locs)| locs.values().map(|&v| v.round() as u32).collect())
            .collect();
        out.push(CapacitySchedule { weekly });
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct FlowRecord {
    path_id: usize,
    location: usize,
    day: i64,
    unit: usize,
    census: u64,
    admitted: u64,
    to_ms: u64,
    to_pcu: u64,
    to_icu: u64,
    discharged: u64,
}

/// Patient traces, one row per (path, location, day, unit).
pub fn write_trace_csv<W: Write>(writer: W, traces: &[PatientTrace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (path_id, tr) in traces.iter().enumerate() {
        for location in 0..tr.locations() {
            for (k, f) in tr.flows.iter().enumerate() {
                for unit in 0..UNITS {
                    let m = f.moved[location][unit];
                    w.serialize(FlowRecord {
                        path_id,
                        location,
                        day: tr.first_day + k as i64,
                        unit,
                        census: tr.census[k].counts[location][unit],
                        admitted: f.admitted[location][unit],
                        to_ms: m[0],
                        to_pcu: m[1],
                        to_icu: m[2],
                        discharged: m[3],
                    })?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads traces written by [`write_trace_csv`]; the census after the last
/// recorded day is rebuilt from its flows.
pub fn read_trace_csv<R: Read>(reader: R, period: usize) -> Result<Vec<PatientTrace>> {
    let mut grouped: BTreeMap<usize, BTreeMap<i64, BTreeMap<(usize, usize), FlowRecord>>> = BTreeMap::new();
    for rec in csv::Reader::from_reader(reader).deserialize() {
        let r: FlowRecord = rec?;
        if r.unit >= UNITS {
            return Err(invalid(format!("unit index {} out of range", r.unit)));
        }
        grouped.entry(r.path_id).or_default().entry(r.day).or_default().insert((r.location, r.unit), r);
    }
    let mut out = Vec::new();
    for (id, days) in grouped {
        let first_day = *days.keys().next().expect("nonempty group");
        let l = days.values().next().map_or(0, |d| d.len() / UNITS);
        let mut census = Vec::with_capacity(days.len() + 1);
        let mut flows = Vec::with_capacity(days.len());
        for (k, (day, cells)) in days.into_iter().enumerate() {
            if day != first_day + k as i64 || cells.len() != l * UNITS {
                return Err(Error::Shape(format!("trace {id} has a gap or missing cells at day {day}")));
            }
            let mut c = CensusState::empty(l);
            let mut f = DayFlows { admitted: vec![[0; UNITS]; l], moved: vec![[[0; UNITS + 1]; UNITS]; l] };
            for ((i, u), r) in cells {
                c.counts[i][u] = r.census;
                f.admitted[i][u] = r.admitted;
                f.moved[i][u] = [r.to_ms, r.to_pcu, r.to_icu, r.discharged];
            }
            census.push(c);
            flows.push(f);
        }
        let last = flows.last().ok_or_else(|| invalid(format!("trace {id} is empty")))?;
        let mut next = CensusState::empty(l);
        for i in 0..l {
            for v in 0..UNITS {
                next.counts[i][v] = last.admitted[i][v] + (0..UNITS).map(|u| last.moved[i][u][v]).sum::<u64>();
            }
        }
        census.push(next);
        out.push(PatientTrace { first_day, period, census, flows });
    }
    Ok(out)
}
