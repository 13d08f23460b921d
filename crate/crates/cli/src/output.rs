//! Tables and their CSV, JSON and SVG renderings.

use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Number(Vec<f64>),
    Text(Vec<String>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Number(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
    /// Drawn as a series in the SVG rendering.
    pub plotted: bool,
}

impl Column {
    pub fn number(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Number(values),
            plotted: true,
        }
    }

    pub fn text(name: impl Into<String>, values: Vec<String>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Text(values),
            plotted: false,
        }
    }

    pub fn unplotted(mut self) -> Self {
        self.plotted = false;
        self
    }

    pub fn numbers(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Number(v) => Some(v),
            ColumnData::Text(_) => None,
        }
    }
}

/// Excised neighbourhood of a rate pole, tagged with the row it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Excision {
    pub row: usize,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    pub excised: Vec<Excision>,
    pub singularities: Vec<f64>,
    /// Command-specific scalars, in insertion order.
    pub extra: Vec<(String, Value)>,
}

/// One command's result. The first column is the abscissa of the SVG plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub config: Map<String, Value>,
    pub columns: Vec<Column>,
    pub metadata: Metadata,
}

impl Table {
    pub fn new(command: &str, config: Map<String, Value>) -> Self {
        Self {
            command: command.to_string(),
            config,
            columns: Vec::new(),
            metadata: Metadata::default(),
        }
    }

    pub fn push(&mut self, column: Column) {
        if let Some(first) = self.columns.first() {
            debug_assert_eq!(first.data.len(), column.data.len(), "column {} length", column.name);
        }
        self.columns.push(column);
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Svg => self.to_svg(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# qsm {} {}\n", self.command, env!("CARGO_PKG_VERSION")));
        for (k, v) in &self.config {
            out.push_str(&format!("# config {k} = {}\n", value_text(v)));
        }
        if !self.metadata.singularities.is_empty() {
            let s: Vec<String> = self.metadata.singularities.iter().map(|&x| fmt_num(x)).collect();
            out.push_str(&format!("# singularities {}\n", s.join(" ")));
        }
        for e in &self.metadata.excised {
            out.push_str(&format!(
                "# excised row {} [{}, {}]\n",
                e.row,
                fmt_num(e.from),
                fmt_num(e.to)
            ));
        }
        for (k, v) in &self.metadata.extra {
            out.push_str(&format!("# {k} = {}\n", value_text(v)));
        }
        let header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in 0..self.rows() {
            let cells: Vec<String> = self
                .columns
                .iter()
                .map(|c| match &c.data {
                    ColumnData::Number(v) => fmt_num(v[r]),
                    ColumnData::Text(v) => v[r].clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let mut columns = Map::new();
        for c in &self.columns {
            let values: Vec<Value> = match &c.data {
                ColumnData::Number(v) => v.iter().map(|&x| num_value(x)).collect(),
                ColumnData::Text(v) => v.iter().map(|s| Value::String(s.clone())).collect(),
            };
            columns.insert(c.name.clone(), Value::Array(values));
        }
        let excised: Vec<Value> = self
            .metadata
            .excised
            .iter()
            .map(|e| json!({"row": e.row, "from": num_value(e.from), "to": num_value(e.to)}))
            .collect();
        let singularities: Vec<Value> = self.metadata.singularities.iter().map(|&x| num_value(x)).collect();
        let mut metadata = Map::new();
        metadata.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        metadata.insert("excised_intervals".into(), Value::Array(excised));
        metadata.insert("singularities".into(), Value::Array(singularities));
        for (k, v) in &self.metadata.extra {
            metadata.insert(k.clone(), v.clone());
        }
        json!({
            "command": self.command,
            "config": self.config,
            "column_order": self.columns.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
            "columns": columns,
            "metadata": metadata,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn to_svg(&self) -> String {
        svg::render(self)
    }
}

/// 12 significant digits, then the shortest text that round-trips that value.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded = round_sig(x);
    if rounded == 0.0 {
        return "0".into();
    }
    let text = format!("{rounded:?}");
    text.strip_suffix(".0").map(str::to_string).unwrap_or(text)
}

fn round_sig(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn num_value(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt_num),
        other => other.to_string(),
    }
}

/// Formats an `f64` config echo entry with the table's precision.
pub fn config_num(x: f64) -> Value {
    num_value(x)
}

mod svg {
    use super::{fmt_num, Table};

    const WIDTH: f64 = 800.0;
    const HEIGHT: f64 = 500.0;
    const LEFT: f64 = 80.0;
    const RIGHT: f64 = 170.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 60.0;
    const PALETTE: [&str; 6] = ["#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

    struct Scale {
        lo: f64,
        hi: f64,
        from: f64,
        to: f64,
    }

    impl Scale {
        fn map(&self, x: f64) -> f64 {
            self.from + (x - self.lo) / (self.hi - self.lo) * (self.to - self.from)
        }
    }

    fn padded(lo: f64, hi: f64) -> (f64, f64) {
        if !(hi > lo) {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            return (lo - pad, hi + pad);
        }
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }

    /// Quantile-based range so a single pole does not flatten the rest of the curve.
    fn y_range(values: &[f64]) -> (f64, f64) {
        let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return (-1.0, 1.0);
        }
        finite.sort_by(f64::total_cmp);
        let (min, max) = (finite[0], finite[finite.len() - 1]);
        let q = |f: f64| finite[((finite.len() - 1) as f64 * f).round() as usize];
        let (q_lo, q_hi) = (q(0.02), q(0.98));
        let spread = (q_hi - q_lo).max(f64::MIN_POSITIVE);
        padded(min.max(q_lo - spread), max.min(q_hi + spread))
    }

    fn ticks(lo: f64, hi: f64) -> Vec<f64> {
        let raw = (hi - lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let mut t = (lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= hi + 1e-9 * step {
            out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
            t += step;
        }
        out
    }

    fn escape(s: &str) -> String {
        s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
    }

    pub(super) fn render(table: &Table) -> String {
        let Some(x_col) = table.columns.first() else {
            return String::from("<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n");
        };
        let xs = x_col.numbers().unwrap_or(&[]);
        let series: Vec<(&str, &[f64])> = table
            .columns
            .iter()
            .skip(1)
            .filter(|c| c.plotted)
            .filter_map(|c| c.numbers().map(|v| (c.name.as_str(), v)))
            .collect();

        let finite_x: Vec<f64> = xs.iter().copied().filter(|v| v.is_finite()).collect();
        let (x_lo, x_hi) = if finite_x.is_empty() {
            (0.0, 1.0)
        } else {
            let lo = finite_x.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = finite_x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                padded(lo, hi)
            }
        };
        let all_y: Vec<f64> = series.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        let (y_lo, y_hi) = y_range(&all_y);
        let sx = Scale {
            lo: x_lo,
            hi: x_hi,
            from: LEFT,
            to: WIDTH - RIGHT,
        };
        let sy = Scale {
            lo: y_lo,
            hi: y_hi,
            from: HEIGHT - BOTTOM,
            to: TOP,
        };

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        ));
        out.push_str("<metadata><![CDATA[\n");
        out.push_str(&table.to_csv().replace("]]>", "]]]]><![CDATA[>"));
        out.push_str("]]></metadata>\n");
        out.push_str(&format!(
            "<defs><clipPath id=\"plot-area\"><rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\"/></clipPath></defs>\n",
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">qsm {}</text>\n",
            (LEFT + WIDTH - RIGHT) / 2.0,
            escape(&table.command)
        ));

        out.push_str("<g class=\"axes\" stroke=\"black\" fill=\"none\">\n");
        out.push_str(&format!(
            "<line x1=\"{LEFT}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\"/>\n<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{b}\"/>\n",
            b = HEIGHT - BOTTOM,
            r = WIDTH - RIGHT
        ));
        out.push_str("</g>\n<g class=\"ticks\" font-size=\"11\">\n");
        for t in ticks(x_lo, x_hi) {
            let x = sx.map(t);
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{b}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                HEIGHT - BOTTOM + 5.0,
                HEIGHT - BOTTOM + 18.0,
                fmt_num(t),
                b = HEIGHT - BOTTOM
            ));
        }
        for t in ticks(y_lo, y_hi) {
            let y = sy.map(t);
            out.push_str(&format!(
                "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0,
                fmt_num(t)
            ));
        }
        out.push_str("</g>\n");
        out.push_str(&format!(
            "<text class=\"xlabel\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 15.0,
            escape(&x_col.name)
        ));

        out.push_str("<g clip-path=\"url(#plot-area)\" fill=\"none\" stroke-width=\"1.5\">\n");
        for (k, (name, ys)) in series.iter().enumerate() {
            let points: Vec<String> = xs
                .iter()
                .zip(ys.iter())
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(&x, &y)| {
                    // Keep far-off points finite in the output; the clip path hides them.
                    let py = sy.map(y).clamp(-10.0 * HEIGHT, 11.0 * HEIGHT);
                    format!("{:.2},{:.2}", sx.map(x), py)
                })
                .collect();
            out.push_str(&format!(
                "<polyline class=\"series\" data-name=\"{}\" stroke=\"{}\" points=\"{}\"/>\n",
                escape(name),
                PALETTE[k % PALETTE.len()],
                points.join(" ")
            ));
        }
        out.push_str("</g>\n<g class=\"legend\">\n");
        for (k, (name, _)) in series.iter().enumerate() {
            let y = TOP + 10.0 + 18.0 * k as f64;
            let x = WIDTH - RIGHT + 15.0;
            out.push_str(&format!(
                "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"2\"/><text x=\"{}\" y=\"{}\">{}</text>\n",
                x + 20.0,
                PALETTE[k % PALETTE.len()],
                x + 26.0,
                y + 4.0,
                escape(name)
            ));
        }
        out.push_str("</g>\n</svg>\n");
        out
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn ticks_cover_range() {
            let t = ticks(0.0, 6.0);
            assert_eq!(t.first(), Some(&0.0));
            assert!(t.len() >= 4 && t.len() <= 8, "{t:?}");
        }

        #[test]
        fn pole_does_not_set_range() {
            let mut v: Vec<f64> = (0..100).map(|k| k as f64 * 0.01).collect();
            v.push(1e9);
            let (_, hi) = y_range(&v);
            assert!(hi < 10.0);
        }
    }
}
