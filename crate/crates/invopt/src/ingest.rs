//! Flat-file ingestion of ERP-style historical data.
//!
//! Six CSV files (UTF-8, header row, ISO-8601 dates, `.` decimal separator)
//! describe a fleet of SKUs; [`load_dataset`] / [`load_fleet`] parse and
//! validate them into per-SKU [`SkuDataset`] views. Daily series are
//! densified over the observed span — a missing day means zero activity.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::domain::{DailySeries, Day, DayRange, PlanningParams, ReorderParams};
use crate::{Error, Result};

/// Two-dimensional demand forecast: quantity forecast for a `target` day,
/// made on an `origin` day. Rows are the per-origin horizon vectors.
#[derive(Debug, Clone, Default)]
pub struct ForecastMatrix {
    rows: BTreeMap<Day, BTreeMap<Day, f64>>,
    /// Days between successive forecast origins (1 = daily forecasts).
    pub cadence: i64,
}

impl ForecastMatrix {
    pub fn new(cadence: i64) -> ForecastMatrix {
        ForecastMatrix {
            rows: BTreeMap::new(),
            cadence: cadence.max(1),
        }
    }

    /// Insert one (origin, target) entry. Duplicate keys and targets before
    /// the origin are rejected.
    pub fn insert(&mut self, origin: Day, target: Day, qty: f64) -> Result<()> {
        if target < origin {
            return Err(Error::Range(format!(
                "forecast target {target} precedes origin {origin}"
            )));
        }
        match self.rows.entry(origin).or_default().entry(target) {
            Entry::Vacant(slot) => {
                slot.insert(qty);
                Ok(())
            }
            Entry::Occupied(_) => Err(Error::Range(format!(
                "duplicate forecast entry for origin {origin}, target {target}"
            ))),
        }
    }

    /// Forecast value for `target` as seen from `origin`. When the exact
    /// origin row is missing (or lacks the target), the nearest earlier
    /// origin carrying that target answers; with no such row the value is 0.
    pub fn value_at(&self, origin: Day, target: Day) -> f64 {
        for (_, row) in self.rows.range(..=origin).rev() {
            if let Some(&qty) = row.get(&target) {
                return qty;
            }
        }
        0.0
    }

    /// The horizon row seen from `origin`: values for targets
    /// `origin .. origin + horizon`.
    pub fn row(&self, origin: Day, horizon: i64) -> Vec<f64> {
        (0..horizon)
            .map(|i| self.value_at(origin, origin + i))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Day, Day, f64)> + '_ {
        self.rows
            .iter()
            .flat_map(|(&o, row)| row.iter().map(move |(&t, &q)| (o, t, q)))
    }
}

/// One purchase order: what was planned, and (once delivered) what actually
/// happened. The actual fields are either both present or both absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Order {
    pub id: String,
    pub planned_date: Day,
    pub planned_qty: f64,
    pub actual_date: Option<Day>,
    pub actual_qty: Option<f64>,
}

/// Planned vs. actual purchase orders for one SKU.
#[derive(Debug, Clone, Default)]
pub struct OrderLedger {
    pub orders: Vec<Order>,
}

impl OrderLedger {
    /// Orders planned to arrive inside `window` that have actuals recorded.
    pub fn delivered_in(&self, window: DayRange) -> impl Iterator<Item = &Order> {
        self.orders.iter().filter(move |o| {
            window.contains(o.planned_date) && o.actual_date.is_some() && o.actual_qty.is_some()
        })
    }

    /// Total actually received quantity per day (from actual dates).
    pub fn actual_arrivals(&self, span: DayRange) -> DailySeries {
        let mut series = DailySeries::zeros(span.start, span.len());
        for o in &self.orders {
            if let (Some(date), Some(qty)) = (o.actual_date, o.actual_qty) {
                if span.contains(date) {
                    series.add(date, qty);
                }
            }
        }
        series
    }
}

/// Everything known about one SKU: planning master data, daily history,
/// forecasts and the order ledger, covering `span` densely.
#[derive(Debug, Clone)]
pub struct SkuDataset {
    pub params: PlanningParams,
    /// The reorder parameters the operator actually used (from the master).
    pub actual_reorder: ReorderParams,
    pub actual_inventory: DailySeries,
    pub actual_consumption: DailySeries,
    pub misc_movements: DailySeries,
    pub blocked_movements: DailySeries,
    pub forecasts: ForecastMatrix,
    pub orders: OrderLedger,
    pub span: DayRange,
}

impl SkuDataset {
    /// Net movement flow per day (miscellaneous + blocked).
    pub fn movement_sum(&self, day: Day) -> f64 {
        self.misc_movements.get(day) + self.blocked_movements.get(day)
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let sku = &self.params.sku_id;
        if self.actual_reorder.ssv < 0.0 || self.actual_reorder.st < 0 {
            return Err(Error::Validation {
                sku: sku.clone(),
                message: "actual ssv/st must be non-negative".into(),
            });
        }
        let latest_allowed = self.span.end + self.params.horizon;
        for o in &self.orders.orders {
            if o.planned_qty <= 0.0 {
                return Err(Error::Validation {
                    sku: sku.clone(),
                    message: format!("order {} has non-positive planned qty", o.id),
                });
            }
            if o.actual_date.is_some() != o.actual_qty.is_some() {
                return Err(Error::Validation {
                    sku: sku.clone(),
                    message: format!(
                        "order {} must have actual date and qty together or neither",
                        o.id
                    ),
                });
            }
            if o.planned_date < self.span.start || o.planned_date >= latest_allowed {
                return Err(Error::Validation {
                    sku: sku.clone(),
                    message: format!(
                        "order {} planned on {} outside span {} (+ horizon)",
                        o.id, o.planned_date, self.span
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Densify a sparse day map over `span` with zeros on the missing days.
/// Keys outside the span are a range error.
pub fn densify(sparse: &BTreeMap<Day, f64>, span: DayRange) -> Result<DailySeries> {
    let mut series = DailySeries::zeros(span.start, span.len());
    for (&day, &qty) in sparse {
        if !span.contains(day) {
            return Err(Error::Range(format!("day {day} outside span {span}")));
        }
        series.set(day, qty);
    }
    Ok(series)
}

// --- CSV parsing -----------------------------------------------------------

struct Row {
    path: PathBuf,
    line: usize,
    record: csv::StringRecord,
    header: csv::StringRecord,
}

impl Row {
    fn err(&self, message: String) -> Error {
        Error::Schema {
            path: self.path.clone(),
            row: self.line,
            message,
        }
    }

    fn field(&self, name: &str) -> Result<&str> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.err(format!("missing column {name:?}")))?;
        self.record
            .get(idx)
            .ok_or_else(|| self.err(format!("row too short for column {name:?}")))
    }

    fn str_field(&self, name: &str) -> Result<String> {
        Ok(self.field(name)?.trim().to_string())
    }

    fn f64_field(&self, name: &str) -> Result<f64> {
        let raw = self.field(name)?.trim();
        let v: f64 = raw
            .parse()
            .map_err(|_| self.err(format!("column {name}: invalid number {raw:?}")))?;
        if !v.is_finite() {
            return Err(self.err(format!("column {name}: non-finite value {raw:?}")));
        }
        Ok(v)
    }

    fn i64_field(&self, name: &str) -> Result<i64> {
        let raw = self.field(name)?.trim();
        raw.parse()
            .map_err(|_| self.err(format!("column {name}: invalid integer {raw:?}")))
    }

    fn day_field(&self, name: &str) -> Result<Day> {
        let raw = self.field(name)?.trim();
        Day::from_iso(raw).map_err(|_| self.err(format!("column {name}: invalid date {raw:?}")))
    }

    fn opt_day_field(&self, name: &str) -> Result<Option<Day>> {
        let raw = self.field(name)?.trim();
        if raw.is_empty() {
            Ok(None)
        } else {
            Ok(Some(self.day_field(name)?))
        }
    }

    fn opt_f64_field(&self, name: &str) -> Result<Option<f64>> {
        let raw = self.field(name)?.trim();
        if raw.is_empty() {
            Ok(None)
        } else {
            Ok(Some(self.f64_field(name)?))
        }
    }
}

fn for_each_row(path: &Path, mut f: impl FnMut(&Row) -> Result<()>) -> Result<()> {
    if !path.exists() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            row: 0,
            message: e.to_string(),
        })?;
    let header = reader
        .headers()
        .map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            row: line,
            message: e.to_string(),
        })?;
        let row = Row {
            path: path.to_path_buf(),
            line,
            record,
            header: header.clone(),
        };
        f(&row)?;
    }
    Ok(())
}

#[derive(Default)]
struct RawSku {
    inventory: BTreeMap<Day, f64>,
    consumption: BTreeMap<Day, f64>,
    misc: BTreeMap<Day, f64>,
    blocked: BTreeMap<Day, f64>,
    forecasts: Vec<(Day, Day, f64, usize)>,
    orders: Vec<Order>,
}

struct MasterRow {
    params: PlanningParams,
    cadence: i64,
    actual_reorder: ReorderParams,
}

/// Load and validate every SKU found in `root`'s CSV files.
pub fn load_fleet(root: &Path) -> Result<BTreeMap<String, SkuDataset>> {
    let mut masters: BTreeMap<String, MasterRow> = BTreeMap::new();
    for_each_row(&root.join("sku_master.csv"), |row| {
        let sku_id = row.str_field("sku_id")?;
        let lead_time = row.i64_field("lead_time")?;
        let params = PlanningParams {
            sku_id: sku_id.clone(),
            lead_time,
            expedited_lead_time: row.i64_field("expedited_lead_time")?,
            ptf: row.i64_field("ptf")?,
            moq: row.f64_field("moq")?,
            rounding_value: row.f64_field("rounding_value")?,
            holding_cost: row.f64_field("holding_cost")?,
            order_cost: row.f64_field("order_cost")?,
            target_sl: row.f64_field("target_sl")?,
            horizon: row.i64_field("horizon")?,
            seeding_window: lead_time,
        };
        let master = MasterRow {
            params,
            cadence: row.i64_field("forecast_cadence")?,
            actual_reorder: ReorderParams {
                ssv: row.f64_field("actual_ssv")?,
                st: row.i64_field("actual_st")?,
            },
        };
        if masters.insert(sku_id.clone(), master).is_some() {
            return Err(row.err(format!("duplicate sku_master row for {sku_id}")));
        }
        Ok(())
    })?;

    let mut raw: BTreeMap<String, RawSku> = BTreeMap::new();
    for sku in masters.keys() {
        raw.insert(sku.clone(), RawSku::default());
    }

    let mut load_daily = |file: &str,
                          col: &str,
                          pick: fn(&mut RawSku) -> &mut BTreeMap<Day, f64>|
     -> Result<()> {
        for_each_row(&root.join(file), |row| {
            let sku = row.str_field("sku_id")?;
            let Some(bucket) = raw.get_mut(&sku) else {
                log::debug!("{file}: ignoring row for unknown sku {sku}");
                return Ok(());
            };
            let day = row.day_field("date")?;
            let qty = row.f64_field(col)?;
            if pick(bucket).insert(day, qty).is_some() {
                return Err(row.err(format!("duplicate ({sku}, {day}) row")));
            }
            Ok(())
        })
    };
    load_daily("inventory.csv", "qty", |r| &mut r.inventory)?;
    load_daily("consumption.csv", "qty", |r| &mut r.consumption)?;

    for_each_row(&root.join("movements.csv"), |row| {
        let sku = row.str_field("sku_id")?;
        let Some(bucket) = raw.get_mut(&sku) else {
            return Ok(());
        };
        let day = row.day_field("date")?;
        let misc = row.f64_field("misc_qty")?;
        let blocked = row.f64_field("blocked_qty")?;
        if bucket.misc.insert(day, misc).is_some() {
            return Err(row.err(format!("duplicate ({sku}, {day}) movements row")));
        }
        bucket.blocked.insert(day, blocked);
        Ok(())
    })?;

    for_each_row(&root.join("forecasts.csv"), |row| {
        let sku = row.str_field("sku_id")?;
        let Some(bucket) = raw.get_mut(&sku) else {
            return Ok(());
        };
        let origin = row.day_field("origin_date")?;
        let target = row.day_field("target_date")?;
        let qty = row.f64_field("qty")?;
        if qty < 0.0 {
            return Err(row.err(format!("negative forecast qty {qty}")));
        }
        bucket.forecasts.push((origin, target, qty, row.line));
        Ok(())
    })?;

    for_each_row(&root.join("orders.csv"), |row| {
        let sku = row.str_field("sku_id")?;
        let Some(bucket) = raw.get_mut(&sku) else {
            return Ok(());
        };
        bucket.orders.push(Order {
            id: row.str_field("order_id")?,
            planned_date: row.day_field("planned_date")?,
            planned_qty: row.f64_field("planned_qty")?,
            actual_date: row.opt_day_field("actual_date")?,
            actual_qty: row.opt_f64_field("actual_qty")?,
        });
        Ok(())
    })?;

    let mut fleet = BTreeMap::new();
    for (sku_id, master) in masters {
        let bucket = raw.remove(&sku_id).unwrap();
        let dataset = assemble(root, master, bucket)?;
        fleet.insert(sku_id, dataset);
    }
    Ok(fleet)
}

fn assemble(root: &Path, master: MasterRow, bucket: RawSku) -> Result<SkuDataset> {
    let sku = master.params.sku_id.clone();
    let all_days = bucket
        .inventory
        .keys()
        .chain(bucket.consumption.keys())
        .chain(bucket.misc.keys())
        .chain(bucket.blocked.keys());
    let (mut min_day, mut max_day) = (None::<Day>, None::<Day>);
    for &d in all_days {
        min_day = Some(min_day.map_or(d, |m: Day| m.min(d)));
        max_day = Some(max_day.map_or(d, |m: Day| m.max(d)));
    }
    let (Some(lo), Some(hi)) = (min_day, max_day) else {
        return Err(Error::Validation {
            sku,
            message: "no daily history rows found".into(),
        });
    };
    let span = DayRange::new(lo, hi + 1);

    let mut forecasts = ForecastMatrix::new(master.cadence);
    for (origin, target, qty, line) in bucket.forecasts {
        forecasts.insert(origin, target, qty).map_err(|e| Error::Schema {
            path: root.join("forecasts.csv"),
            row: line,
            message: e.to_string(),
        })?;
    }

    let dataset = SkuDataset {
        params: master.params,
        actual_reorder: master.actual_reorder,
        actual_inventory: densify(&bucket.inventory, span)?,
        actual_consumption: densify(&bucket.consumption, span)?,
        misc_movements: densify(&bucket.misc, span)?,
        blocked_movements: densify(&bucket.blocked, span)?,
        forecasts,
        orders: OrderLedger {
            orders: bucket.orders,
        },
        span,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Load one SKU from `root`.
pub fn load_dataset(root: &Path, sku_id: &str) -> Result<SkuDataset> {
    let mut fleet = load_fleet(root)?;
    fleet.remove(sku_id).ok_or_else(|| Error::Validation {
        sku: sku_id.to_string(),
        message: format!("sku not present in {}", root.join("sku_master.csv").display()),
    })
}

// --- CSV writing -------------------------------------------------------------

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    csv::Writer::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })
}

fn wr<W: std::io::Write>(w: &mut csv::Writer<W>, path: &Path, fields: &[String]) -> Result<()> {
    w.write_record(fields).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })
}

/// Write a fleet of datasets as the six ingestion CSVs under `root`.
/// `load_fleet` on the result reproduces the datasets.
pub fn write_fleet(root: &Path, fleet: &BTreeMap<String, SkuDataset>) -> Result<()> {
    let path = root.join("sku_master.csv");
    let mut w = writer(&path)?;
    wr(
        &mut w,
        &path,
        &[
            "sku_id",
            "lead_time",
            "expedited_lead_time",
            "ptf",
            "moq",
            "rounding_value",
            "holding_cost",
            "order_cost",
            "target_sl",
            "horizon",
            "forecast_cadence",
            "actual_ssv",
            "actual_st",
        ]
        .map(String::from),
    )?;
    for (sku, ds) in fleet {
        let p = &ds.params;
        wr(
            &mut w,
            &path,
            &[
                sku.clone(),
                p.lead_time.to_string(),
                p.expedited_lead_time.to_string(),
                p.ptf.to_string(),
                p.moq.to_string(),
                p.rounding_value.to_string(),
                p.holding_cost.to_string(),
                p.order_cost.to_string(),
                p.target_sl.to_string(),
                p.horizon.to_string(),
                ds.forecasts.cadence.to_string(),
                ds.actual_reorder.ssv.to_string(),
                ds.actual_reorder.st.to_string(),
            ],
        )?;
    }

    let write_daily = |file: &str,
                       col: &str,
                       pick: fn(&SkuDataset) -> &DailySeries|
     -> Result<()> {
        let path = root.join(file);
        let mut w = writer(&path)?;
        wr(&mut w, &path, &["sku_id".into(), "date".into(), col.into()])?;
        for (sku, ds) in fleet {
            for (day, qty) in pick(ds).iter() {
                wr(&mut w, &path, &[sku.clone(), day.to_string(), qty.to_string()])?;
            }
        }
        Ok(())
    };
    write_daily("inventory.csv", "qty", |d| &d.actual_inventory)?;
    write_daily("consumption.csv", "qty", |d| &d.actual_consumption)?;

    let path = root.join("movements.csv");
    let mut w = writer(&path)?;
    wr(
        &mut w,
        &path,
        &["sku_id", "date", "misc_qty", "blocked_qty"].map(String::from),
    )?;
    for (sku, ds) in fleet {
        for (day, misc) in ds.misc_movements.iter() {
            wr(
                &mut w,
                &path,
                &[
                    sku.clone(),
                    day.to_string(),
                    misc.to_string(),
                    ds.blocked_movements.get(day).to_string(),
                ],
            )?;
        }
    }

    let path = root.join("forecasts.csv");
    let mut w = writer(&path)?;
    wr(
        &mut w,
        &path,
        &["sku_id", "origin_date", "target_date", "qty"].map(String::from),
    )?;
    for (sku, ds) in fleet {
        for (origin, target, qty) in ds.forecasts.entries() {
            wr(
                &mut w,
                &path,
                &[
                    sku.clone(),
                    origin.to_string(),
                    target.to_string(),
                    qty.to_string(),
                ],
            )?;
        }
    }

    let path = root.join("orders.csv");
    let mut w = writer(&path)?;
    wr(
        &mut w,
        &path,
        &[
            "sku_id",
            "order_id",
            "planned_date",
            "planned_qty",
            "actual_date",
            "actual_qty",
        ]
        .map(String::from),
    )?;
    for (sku, ds) in fleet {
        for o in &ds.orders.orders {
            wr(
                &mut w,
                &path,
                &[
                    sku.clone(),
                    o.id.clone(),
                    o.planned_date.to_string(),
                    o.planned_qty.to_string(),
                    o.actual_date.map(|d| d.to_string()).unwrap_or_default(),
                    o.actual_qty.map(|q| q.to_string()).unwrap_or_default(),
                ],
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn densify_zero_fills() {
        let span = DayRange::new(Day(0), Day(4));
        let mut sparse = BTreeMap::new();
        sparse.insert(Day(2), 5.0);
        let s = densify(&sparse, span).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 5.0, 0.0]);
    }

    #[test]
    fn densify_empty_map_is_all_zero() {
        let s = densify(&BTreeMap::new(), DayRange::new(Day(0), Day(3))).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn densify_dense_input_is_identity() {
        let mut sparse = BTreeMap::new();
        sparse.insert(Day(0), 1.0);
        sparse.insert(Day(1), 2.0);
        let s = densify(&sparse, DayRange::new(Day(0), Day(2))).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
    }

    #[test]
    fn densify_rejects_out_of_span_keys() {
        let mut sparse = BTreeMap::new();
        sparse.insert(Day(9), 1.0);
        assert!(densify(&sparse, DayRange::new(Day(0), Day(4))).is_err());
    }

    #[test]
    fn forecast_matrix_rejects_inverted_and_duplicate_entries() {
        let mut m = ForecastMatrix::new(1);
        assert!(m.insert(Day(5), Day(4), 1.0).is_err());
        m.insert(Day(5), Day(6), 1.0).unwrap();
        assert!(m.insert(Day(5), Day(6), 2.0).is_err());
    }

    #[test]
    fn forecast_matrix_nearest_earlier_origin_fallback() {
        let mut m = ForecastMatrix::new(7);
        m.insert(Day(0), Day(3), 9.0).unwrap();
        m.insert(Day(7), Day(8), 4.0).unwrap();
        // Exact hit.
        assert_eq!(m.value_at(Day(0), Day(3)), 9.0);
        // Origin 5 is missing: falls back to origin 0's row.
        assert_eq!(m.value_at(Day(5), Day(3)), 9.0);
        // Origin 7 exists but lacks target 3: earlier row answers.
        assert_eq!(m.value_at(Day(7), Day(3)), 9.0);
        // Nothing anywhere: zero.
        assert_eq!(m.value_at(Day(7), Day(20)), 0.0);
        // Later origins are never consulted.
        assert_eq!(m.value_at(Day(3), Day(8)), 0.0);
    }

    proptest! {
        #[test]
        fn densify_preserves_sums(entries in proptest::collection::btree_map(0_i64..30, -50.0_f64..50.0, 0..20)) {
            let sparse: BTreeMap<Day, f64> = entries.iter().map(|(&d, &v)| (Day(d), v)).collect();
            let dense = densify(&sparse, DayRange::new(Day(0), Day(30))).unwrap();
            let want: f64 = sparse.values().sum();
            prop_assert!((dense.sum() - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }
}
