//! Convergence-curve aggregation and SVG rendering.

use super::ExperimentError;
use crate::record::RunRecord;
use std::collections::BTreeMap;

/// Per-arm aggregate of best-observed energy versus cumulative cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSeries {
    pub arm: String,
    pub costs: Vec<f64>,
    pub median: Vec<f64>,
    pub mean: Vec<f64>,
    /// Standard error of the mean across seeds (`std / sqrt(n)`).
    pub stderr: Vec<f64>,
    pub n_seeds: usize,
}

fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Group records by arm and reduce across seeds. Every record of an arm
/// must share the same cumulative-cost grid. The returned series are sorted
/// by their final median energy (best first), which also fixes the legend
/// order.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<ArmSeries>, ExperimentError> {
    if records.is_empty() {
        return Err(ExperimentError::Data("no records to aggregate".into()));
    }
    let mut by_arm: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        by_arm.entry(&record.arm).or_default().push(record);
    }
    let mut series = Vec::new();
    for (arm, group) in by_arm {
        let costs: Vec<f64> = group[0].rows.iter().map(|r| r.cumulative_cost).collect();
        for record in &group {
            let this: Vec<f64> = record.rows.iter().map(|r| r.cumulative_cost).collect();
            if this != costs {
                return Err(ExperimentError::Data(format!(
                    "records of arm '{arm}' have mismatched cost grids"
                )));
            }
        }
        let n_seeds = group.len();
        let mut median = Vec::with_capacity(costs.len());
        let mut mean = Vec::with_capacity(costs.len());
        let mut stderr = Vec::with_capacity(costs.len());
        for i in 0..costs.len() {
            let mut values: Vec<f64> = group.iter().map(|r| r.rows[i].best_observed).collect();
            let m = values.iter().sum::<f64>() / n_seeds as f64;
            let se = if n_seeds > 1 {
                let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>()
                    / (n_seeds - 1) as f64;
                (var / n_seeds as f64).sqrt()
            } else {
                0.0
            };
            median.push(median_of(&mut values));
            mean.push(m);
            stderr.push(se);
        }
        series.push(ArmSeries {
            arm: arm.to_string(),
            costs,
            median,
            mean,
            stderr,
            n_seeds,
        });
    }
    series.sort_by(|a, b| {
        let fa = a.median.last().unwrap();
        let fb = b.median.last().unwrap();
        fa.partial_cmp(fb).unwrap().then(a.arm.cmp(&b.arm))
    });
    Ok(series)
}

pub fn convergence_data_csv(series: &[ArmSeries]) -> String {
    let mut out = String::from("# schema: bopt-convergence-v1\n");
    out.push_str("arm,cumulative_cost,median,mean,stderr,n_seeds\n");
    for s in series {
        for i in 0..s.costs.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.arm, s.costs[i], s.median[i], s.mean[i], s.stderr[i], s.n_seeds
            ));
        }
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)
    }
    fn sy(&self, y: f64) -> f64 {
        // svg y grows downward
        self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)
    }
}

/// Render median curves with standard-error bands, one color per arm, a
/// horizontal reference at the exact ground energy, and a legend sorted by
/// final median. Deterministic: the output depends only on the inputs.
pub fn convergence_svg(series: &[ArmSeries], ground_energy: Option<f64>) -> String {
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    let mut xmax = 0.0f64;
    for s in series {
        for i in 0..s.costs.len() {
            ymin = ymin.min(s.median[i] - s.stderr[i]);
            ymax = ymax.max(s.median[i] + s.stderr[i]);
            xmax = xmax.max(s.costs[i]);
        }
    }
    if let Some(e0) = ground_energy {
        ymin = ymin.min(e0);
    }
    let pad = 0.06 * (ymax - ymin).max(1e-12);
    let frame = Frame {
        x0: 0.0,
        x1: xmax.max(1.0),
        y0: ymin - pad,
        y1: ymax + pad,
        left: 74.0,
        right: 640.0,
        top: 24.0,
        bottom: 462.0,
    };
    let mut svg = String::new();
    svg.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"520\" \
         viewBox=\"0 0 880 520\" font-family=\"sans-serif\" font-size=\"13\">\n",
    );
    svg.push_str("<rect width=\"880\" height=\"520\" fill=\"white\"/>\n");
    // axes
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = frame.left,
        r = frame.right,
        t = frame.top,
        b = frame.bottom
    ));
    for k in 0..=5 {
        let x = frame.x0 + (frame.x1 - frame.x0) * k as f64 / 5.0;
        let y = frame.y0 + (frame.y1 - frame.y0) * k as f64 / 5.0;
        svg.push_str(&format!(
            "<line x1=\"{sx}\" y1=\"{b}\" x2=\"{sx}\" y2=\"{b2}\" stroke=\"black\"/>\n\
             <text x=\"{sx}\" y=\"{ty}\" text-anchor=\"middle\">{xv:.0}</text>\n",
            sx = frame.sx(x),
            b = frame.bottom,
            b2 = frame.bottom + 6.0,
            ty = frame.bottom + 22.0,
            xv = x
        ));
        svg.push_str(&format!(
            "<line x1=\"{l}\" y1=\"{sy}\" x2=\"{l2}\" y2=\"{sy}\" stroke=\"black\"/>\n\
             <text x=\"{tx}\" y=\"{sy2}\" text-anchor=\"end\">{yv:.3}</text>\n",
            l = frame.left,
            l2 = frame.left - 6.0,
            sy = frame.sy(y),
            tx = frame.left - 10.0,
            sy2 = frame.sy(y) + 4.0,
            yv = y
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"505\" text-anchor=\"middle\">cumulative cost (budget units)</text>\n",
        x = (frame.left + frame.right) / 2.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{y}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {y})\">\
         best observed energy (Ha)</text>\n",
        y = (frame.top + frame.bottom) / 2.0
    ));
    if let Some(e0) = ground_energy {
        let sy = frame.sy(e0);
        svg.push_str(&format!(
            "<line x1=\"{l}\" y1=\"{sy}\" x2=\"{r}\" y2=\"{sy}\" stroke=\"black\" \
             stroke-dasharray=\"6 4\"/>\n\
             <text x=\"{r2}\" y=\"{sy2}\" font-style=\"italic\">exact E0</text>\n",
            l = frame.left,
            r = frame.right,
            r2 = frame.right - 70.0,
            sy2 = sy - 6.0,
        ));
    }
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if s.n_seeds > 1 {
            let mut band = String::from("<path d=\"M");
            for i in 0..s.costs.len() {
                band.push_str(&format!(
                    " {} {}",
                    frame.sx(s.costs[i]),
                    frame.sy(s.median[i] + s.stderr[i])
                ));
            }
            for i in (0..s.costs.len()).rev() {
                band.push_str(&format!(
                    " L {} {}",
                    frame.sx(s.costs[i]),
                    frame.sy(s.median[i] - s.stderr[i])
                ));
            }
            band.push_str(&format!(
                " Z\" fill=\"{color}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n"
            ));
            svg.push_str(&band);
        }
        let mut line = String::from("<polyline points=\"");
        for i in 0..s.costs.len() {
            line.push_str(&format!(
                "{},{} ",
                frame.sx(s.costs[i]),
                frame.sy(s.median[i])
            ));
        }
        line.push_str(&format!(
            "\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n"
        ));
        svg.push_str(&line);
        // legend row
        let ly = 40.0 + 22.0 * idx as f64;
        svg.push_str(&format!(
            "<line x1=\"660\" y1=\"{ly}\" x2=\"690\" y2=\"{ly}\" stroke=\"{color}\" \
             stroke-width=\"2.5\"/>\n\
             <text x=\"698\" y=\"{ty}\">{arm} (n={n})</text>\n",
            ty = ly + 4.0,
            arm = s.arm,
            n = s.n_seeds
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::IterationRow;

    fn record(arm: &str, seed: u64, energies: &[f64]) -> RunRecord {
        let mut best = f64::INFINITY;
        let rows = energies
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                best = best.min(y);
                IterationRow {
                    iteration: i + 1,
                    cumulative_cost: (i + 1) as f64,
                    theta: vec![0.0],
                    observed_energy: y,
                    best_observed: best,
                    incumbent_eta: None,
                }
            })
            .collect();
        RunRecord {
            arm: arm.into(),
            seed,
            rows,
        }
    }

    #[test]
    fn band_half_width_is_std_over_sqrt_n() {
        let records: Vec<RunRecord> = (0..10)
            .map(|s| record("bopt", s, &[-(s as f64) * 0.1, -1.0]))
            .collect();
        let series = aggregate(&records).unwrap();
        assert_eq!(series.len(), 1);
        let values: Vec<f64> = (0..10).map(|s| -(s as f64) * 0.1).collect();
        let mean = values.iter().sum::<f64>() / 10.0;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9.0).sqrt();
        let expected = std / 10f64.sqrt();
        assert!((series[0].stderr[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn single_seed_yields_an_empty_band() {
        let series = aggregate(&[record("powell", 0, &[-0.1, -0.2])]).unwrap();
        assert_eq!(series[0].stderr, vec![0.0, 0.0]);
        let svg = convergence_svg(&series, Some(-1.0));
        assert!(!svg.contains("fill-opacity"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn legend_orders_arms_by_final_median() {
        let records = vec![
            record("powell", 0, &[-0.1, -0.2]),
            record("bopt", 0, &[-0.5, -1.1]),
            record("lcb", 0, &[-0.4, -0.6]),
        ];
        let series = aggregate(&records).unwrap();
        let order: Vec<&str> = series.iter().map(|s| s.arm.as_str()).collect();
        assert_eq!(order, vec!["bopt", "lcb", "powell"]);
    }

    #[test]
    fn mismatched_cost_grids_are_rejected() {
        let a = record("bopt", 0, &[-0.1, -0.2]);
        let b = record("bopt", 1, &[-0.1, -0.2, -0.3]);
        assert!(matches!(
            aggregate(&[a, b]),
            Err(ExperimentError::Data(_))
        ));
    }

    #[test]
    fn svg_output_is_deterministic() {
        let records = vec![
            record("bopt", 0, &[-0.5, -1.1]),
            record("bopt", 1, &[-0.6, -1.0]),
        ];
        let series = aggregate(&records).unwrap();
        assert_eq!(
            convergence_svg(&series, Some(-1.137)),
            convergence_svg(&series, Some(-1.137))
        );
        let csv = convergence_data_csv(&series);
        assert!(csv.starts_with("# schema: bopt-convergence-v1\n"));
    }
}
