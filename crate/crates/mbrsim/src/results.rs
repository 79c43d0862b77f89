//! Result tables: the flat CSV schema, plot-data figures, and computed
//! summaries. Emission is bit-identical across reruns of the same config.

use std::fmt;

use crate::errors::ConfigError;

pub const RESULTS_HEADER: &str = "setup,vm,vcpu,budget,period_us,metric_name,value";
pub const FIGURE_HEADER: &str = "x,series,y";

/// A metric value. Integers print bare; floats print in Rust's shortest
/// round-trip form (always with a decimal point), so parsing the CSV back
/// reconstructs every value exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl Value {
    pub fn parse(s: &str) -> Result<Value, String> {
        if s.contains(['.', 'e', 'E', 'n', 'i']) {
            s.parse::<f64>().map(Value::Float).map_err(|e| e.to_string())
        } else {
            s.parse::<u64>().map(Value::Int).map_err(|e| e.to_string())
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Int(v) => *v as f64,
            Value::Float(v) => *v,
        }
    }
}

/// One `(run, metric)` row. `vm`/`vcpu` are empty for run-level metrics;
/// `budget` and `period_us` carry the regulation point of the run the row
/// came from (zero when nothing was regulated).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub setup: String,
    pub vm: Option<usize>,
    pub vcpu: Option<usize>,
    pub budget: u64,
    pub period_us: f64,
    pub metric: String,
    pub value: Value,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(RESULTS_HEADER);
        out.push('\n');
        for r in &self.rows {
            let vm = r.vm.map(|v| v.to_string()).unwrap_or_default();
            let vcpu = r.vcpu.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{:?},{},{}\n",
                r.setup, vm, vcpu, r.budget, r.period_us, r.metric, r.value
            ));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<ResultTable, ConfigError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != RESULTS_HEADER {
            return Err(ConfigError::new(
                "results.csv",
                format!("unexpected header '{header}'"),
            ));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(ConfigError::new(
                    format!("results.csv line {}", i + 2),
                    format!("expected 7 fields, got {}", fields.len()),
                ));
            }
            let opt = |s: &str| -> Result<Option<usize>, ConfigError> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| {
                        ConfigError::new(
                            format!("results.csv line {}", i + 2),
                            format!("bad index '{s}'"),
                        )
                    })
                }
            };
            rows.push(ResultRow {
                setup: fields[0].to_string(),
                vm: opt(fields[1])?,
                vcpu: opt(fields[2])?,
                budget: fields[3].parse().map_err(|_| {
                    ConfigError::new(
                        format!("results.csv line {}", i + 2),
                        format!("bad budget '{}'", fields[3]),
                    )
                })?,
                period_us: fields[4].parse().map_err(|_| {
                    ConfigError::new(
                        format!("results.csv line {}", i + 2),
                        format!("bad period '{}'", fields[4]),
                    )
                })?,
                metric: fields[5].to_string(),
                value: Value::parse(fields[6]).map_err(|e| {
                    ConfigError::new(format!("results.csv line {}", i + 2), e)
                })?,
            });
        }
        Ok(ResultTable { rows })
    }

    /// Rows for one metric, in table order.
    pub fn metric_values(&self, metric: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.metric == metric).collect()
    }
}

/// Plot-data series for one figure: `(x, series, y)` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    /// File stem: written as `fig_<name>.csv`.
    pub name: String,
    pub rows: Vec<(f64, String, f64)>,
}

impl Figure {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(FIGURE_HEADER);
        out.push('\n');
        for (x, series, y) in &self.rows {
            out.push_str(&format!("{x:?},{series},{y:?}\n"));
        }
        out
    }
}

/// A table plus its derived views, ready for [`crate::harness::emit_results`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultSet {
    pub table: ResultTable,
    pub figures: Vec<Figure>,
    /// Computed verdict lines for `summary.txt`.
    pub summary: Vec<String>,
    /// Solo runs to persist as `baseline_<workload>.csv`.
    pub baselines: Vec<(String, ResultTable)>,
}

/// Monotonicity verdict over a numeric series, with a tiny relative slack
/// for float noise.
pub fn monotone_non_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9))
}

pub fn monotone_non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
}
