//! Figure builders: CSV artifacts in, SVG out.
//!
//! Each figure kind names the columns it needs; a missing column is
//! reported as such. Multiple input files are concatenated row-wise, so a
//! comparison figure can overlay several runs (for example the two code
//! families).

use std::collections::BTreeMap;
use std::path::PathBuf;

use cattrans_core::analysis;

use crate::error::{CliError, Result};
use crate::svg::{Band, Figure, LineStyle, Series, VLine, ORANGES, PALETTE};
use crate::table::Table;

/// The supported figure kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    /// Cat noise bias versus cat size, per gate.
    Fig3c,
    /// Logical error rate versus noise strength per code distance, with the
    /// estimated threshold as a dashed line.
    Fig4,
    /// Selective-pulse coherent error versus cat size, per pulse family.
    Fig5b,
    /// Cat dephasing exponent: closed forms versus trajectory estimates.
    Fig6,
    /// Qubit overhead versus physical error rate, with shaded bands between
    /// the bracketing bias curves.
    Fig7,
    /// Achievable (phase-flip rate, bias) map per quality value.
    Fig8,
    /// Pulsed-stabilization bit-flip growth curves.
    Fig9,
    /// Code-family comparison of logical error rates under biased noise.
    Fig11c,
}

/// Build the SVG for a figure kind from its input tables.
pub fn build(kind: PlotKind, inputs: &[PathBuf]) -> Result<String> {
    if inputs.is_empty() {
        return Err(CliError::Data("no input files given".into()));
    }
    let mut tables = Vec::new();
    for path in inputs {
        let label = path.display().to_string();
        let table = Table::read(path)?;
        if table.rows.is_empty() {
            return Err(CliError::Data(format!("{label}: no data rows")));
        }
        tables.push((label, table));
    }
    let fig = match kind {
        PlotKind::Fig3c => bias_vs_cat_size(&tables)?,
        PlotKind::Fig4 => rate_vs_noise(&tables, true)?,
        PlotKind::Fig5b => coherent_error_sweep(&tables)?,
        PlotKind::Fig6 => dephasing_comparison(&tables)?,
        PlotKind::Fig7 => overhead_curves(&tables)?,
        PlotKind::Fig8 => achievable_map(&tables)?,
        PlotKind::Fig9 => stabilization_curves(&tables)?,
        PlotKind::Fig11c => family_comparison(&tables)?,
    };
    fig.render()
}

/// Pull the named columns out of every table; strings stay strings.
fn rows(
    tables: &[(String, Table)],
    numeric: &[&str],
    text: &[&str],
) -> Result<Vec<(Vec<f64>, Vec<String>)>> {
    let mut out = Vec::new();
    for (label, table) in tables {
        let n_idx: Vec<usize> = numeric
            .iter()
            .map(|c| table.require(c, label))
            .collect::<Result<_>>()?;
        let t_idx: Vec<usize> =
            text.iter().map(|c| table.require(c, label)).collect::<Result<_>>()?;
        for r in 0..table.rows.len() {
            let nums: Vec<f64> = n_idx.iter().map(|&i| table.f64(r, i)).collect::<Result<_>>()?;
            let strs: Vec<String> = t_idx.iter().map(|&i| table.rows[r][i].clone()).collect();
            out.push((nums, strs));
        }
    }
    Ok(out)
}

/// Optional column lookup: `Some(values)` only when every table has it.
fn optional_column(tables: &[(String, Table)], name: &str) -> Option<Vec<f64>> {
    let mut values = Vec::new();
    for (_, table) in tables {
        let idx = table.column(name)?;
        for r in 0..table.rows.len() {
            values.push(table.f64(r, idx).ok()?);
        }
    }
    Some(values)
}

fn sorted_points(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

fn bias_vs_cat_size(tables: &[(String, Table)]) -> Result<Figure> {
    let data = rows(tables, &["alpha_sq", "eta"], &["gate"])?;
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (nums, strs) in data {
        groups.entry(strs[0].clone()).or_default().push((nums[0], nums[1]));
    }
    let mut fig = Figure::new("Cat noise bias by gate", "|alpha|^2", "eta = p_Z / p_bit").log_y();
    for (gate, pts) in groups {
        fig.series.push(Series::new(gate, sorted_points(pts)));
    }
    Ok(fig)
}

fn rate_vs_noise(tables: &[(String, Table)], with_threshold: bool) -> Result<Figure> {
    let data = rows(tables, &["d_z", "p", "rate"], &[])?;
    let ci = match (optional_column(tables, "ci_low"), optional_column(tables, "ci_high")) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        _ => None,
    };
    let mut groups: BTreeMap<u64, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for (i, (nums, _)) in data.iter().enumerate() {
        groups.entry(nums[0] as u64).or_default().push((i, nums[1], nums[2]));
    }
    let mut fig = Figure::new(
        "Logical error rate vs physical noise",
        "physical error parameter",
        "logical error rate",
    )
    .log_x()
    .log_y();
    let mut curves: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for (d_z, mut entries) in groups {
        entries.sort_by(|a, b| a.1.total_cmp(&b.1));
        let pts: Vec<(f64, f64)> = entries.iter().map(|&(_, p, r)| (p, r)).collect();
        let mut series = Series::new(format!("d_z = {d_z}"), pts.clone());
        if let Some((lo, hi)) = &ci {
            series =
                series.with_errors(entries.iter().map(|&(i, _, _)| (lo[i], hi[i])).collect());
        }
        fig.series.push(series);
        let positive: Vec<(f64, f64)> = pts.into_iter().filter(|&(_, r)| r > 0.0).collect();
        if positive.len() >= 2 {
            curves.push((d_z as usize, positive));
        }
    }
    if with_threshold {
        if let Ok(crossing) = analysis::threshold_estimate(&curves) {
            fig.v_lines.push(VLine { x: crossing, label: "threshold".into() });
        }
    }
    Ok(fig)
}

fn coherent_error_sweep(tables: &[(String, Table)]) -> Result<Figure> {
    let data = rows(tables, &["alpha_sq", "coherent_error"], &["family"])?;
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (nums, strs) in data {
        groups.entry(strs[0].clone()).or_default().push((nums[0], nums[1]));
    }
    let mut fig = Figure::new(
        "Selective-pulse coherent error",
        "|alpha|^2",
        "coherent gate error",
    )
    .log_y();
    for (family, pts) in groups {
        fig.series.push(Series::new(family, sorted_points(pts)));
    }
    Ok(fig)
}

fn dephasing_comparison(tables: &[(String, Table)]) -> Result<Figure> {
    let data = rows(
        tables,
        &["t", "gamma_mc", "std_err", "gamma_formula"],
        &["spectrum", "echo"],
    )?;
    let mut groups: BTreeMap<String, Vec<(f64, f64, f64, f64)>> = BTreeMap::new();
    for (nums, strs) in data {
        let key = format!("{} {}", strs[0], if strs[1] == "true" { "echo" } else { "free" });
        groups.entry(key).or_default().push((nums[0], nums[1], nums[2], nums[3]));
    }
    let mut fig = Figure::new(
        "Cat dephasing: closed form vs trajectories",
        "time",
        "dephasing exponent",
    )
    .log_x()
    .log_y();
    for (i, (key, mut entries)) in groups.into_iter().enumerate() {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = PALETTE[i % PALETTE.len()];
        let formula: Vec<(f64, f64)> = entries.iter().map(|&(t, _, _, g)| (t, g)).collect();
        fig.series.push(
            Series::new(format!("{key} (closed form)"), formula).color(color).marker(false),
        );
        let mc: Vec<(f64, f64)> = entries.iter().map(|&(t, g, _, _)| (t, g)).collect();
        let err: Vec<(f64, f64)> =
            entries.iter().map(|&(_, g, s, _)| (g - s, g + s)).collect();
        fig.series.push(
            Series::new(format!("{key} (sampled)"), mc)
                .color(color)
                .line(LineStyle::None)
                .with_errors(err),
        );
    }
    Ok(fig)
}

fn overhead_curves(tables: &[(String, Table)]) -> Result<Figure> {
    let data = rows(tables, &["target", "p", "p_z", "eta", "qubits"], &["kind"])?;
    // target -> curves
    let mut unbiased: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    let mut biased: BTreeMap<(u64, u64), Vec<(f64, f64)>> = BTreeMap::new();
    let mut targets: Vec<f64> = Vec::new();
    let mut etas: Vec<f64> = Vec::new();
    for (nums, strs) in &data {
        let (target, p, p_z, eta, qubits) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
        if !targets.iter().any(|&t| t == target) {
            targets.push(target);
        }
        match strs[0].as_str() {
            "unbiased" => unbiased.entry(target.to_bits()).or_default().push((p, qubits)),
            "biased" => {
                if !etas.iter().any(|&e| e == eta) {
                    etas.push(eta);
                }
                biased
                    .entry((target.to_bits(), eta.to_bits()))
                    .or_default()
                    .push((p_z, qubits));
            }
            other => {
                return Err(CliError::Data(format!(
                    "unknown overhead row kind {other:?} (expected unbiased/biased)"
                )))
            }
        }
    }
    etas.sort_by(f64::total_cmp);
    targets.sort_by(f64::total_cmp);

    let mut fig = Figure::new(
        "Logical memory overhead",
        "physical error rate (p or p_Z)",
        "qubits (2 d_X d_Z - 1)",
    )
    .log_x()
    .log_y();

    // Shaded band between the lowest- and highest-bias curves per target.
    for (&target, _) in targets.iter().zip(0..) {
        if etas.len() < 2 {
            break;
        }
        let lo_eta = etas[0].to_bits();
        let hi_eta = etas[etas.len() - 1].to_bits();
        let (Some(lo_curve), Some(hi_curve)) = (
            biased.get(&(target.to_bits(), lo_eta)),
            biased.get(&(target.to_bits(), hi_eta)),
        ) else {
            continue;
        };
        // Match shared x values exactly (both curves come from one grid).
        let hi_map: BTreeMap<u64, f64> =
            hi_curve.iter().map(|&(x, y)| (x.to_bits(), y)).collect();
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for &(x, y_lo_eta) in sorted_points(lo_curve.clone()).iter() {
            if let Some(&y_hi_eta) = hi_map.get(&x.to_bits()) {
                upper.push((x, y_lo_eta.max(y_hi_eta)));
                lower.push((x, y_lo_eta.min(y_hi_eta)));
            }
        }
        if upper.len() >= 2 {
            fig.bands.push(Band { color: "#fd8d3c".into(), opacity: 0.25, upper, lower });
        }
    }

    for (ti, &target) in targets.iter().enumerate() {
        if let Some(pts) = unbiased.get(&target.to_bits()) {
            fig.series.push(
                Series::new(
                    format!("unbiased, target {target:.0e}"),
                    sorted_points(pts.clone()),
                )
                .color(["#000000", "#555555", "#999999"][ti % 3]),
            );
        }
        for (ei, &eta) in etas.iter().enumerate() {
            if let Some(pts) = biased.get(&(target.to_bits(), eta.to_bits())) {
                fig.series.push(
                    Series::new(
                        format!("eta {eta:.0e}, target {target:.0e}"),
                        sorted_points(pts.clone()),
                    )
                    .color(ORANGES[ei % ORANGES.len()]),
                );
            }
        }
    }
    Ok(fig)
}

fn achievable_map(tables: &[(String, Table)]) -> Result<Figure> {
    let data = rows(tables, &["q", "p_z", "eta"], &["kind"])?;
    let mut by_q: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    let mut optimum: Vec<(f64, f64)> = Vec::new();
    for (nums, strs) in data {
        match strs[0].as_str() {
            "point" => by_q.entry(nums[0].to_bits()).or_default().push((nums[1], nums[2])),
            "optimum" => optimum.push((nums[1], nums[2])),
            other => {
                return Err(CliError::Data(format!(
                    "unknown achievable row kind {other:?} (expected point/optimum)"
                )))
            }
        }
    }
    let mut fig = Figure::new(
        "Achievable phase-flip rate and bias",
        "p_Z",
        "eta",
    )
    .log_x()
    .log_y();
    for (bits, pts) in by_q {
        let q = f64::from_bits(bits);
        fig.series.push(Series::new(format!("q = {q:.1e}"), sorted_points(pts)));
    }
    if optimum.len() >= 2 {
        fig.series.push(
            Series::new("max beneficial bias", sorted_points(optimum))
                .color("#222222")
                .line(LineStyle::Dashed),
        );
    }
    Ok(fig)
}

fn stabilization_curves(tables: &[(String, Table)]) -> Result<Figure> {
    let data = rows(tables, &["kappa_ratio", "duty", "t", "p_x"], &[])?;
    let mut groups: BTreeMap<(u64, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for (nums, _) in data {
        groups
            .entry((nums[0].to_bits(), nums[1].to_bits()))
            .or_default()
            .push((nums[2], nums[3]));
    }
    let mut fig = Figure::new(
        "Pulsed stabilization: bit-flip growth",
        "time",
        "bit-flip probability",
    )
    .log_x()
    .log_y();
    for ((rb, db), pts) in groups {
        let (ratio, duty) = (f64::from_bits(rb), f64::from_bits(db));
        fig.series
            .push(Series::new(format!("ratio {ratio}, duty {duty}"), sorted_points(pts)));
    }
    Ok(fig)
}

fn family_comparison(tables: &[(String, Table)]) -> Result<Figure> {
    let data = rows(tables, &["d_z", "p", "rate"], &["family"])?;
    let ci = match (optional_column(tables, "ci_low"), optional_column(tables, "ci_high")) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        _ => None,
    };
    let mut groups: BTreeMap<(String, u64), Vec<(usize, f64, f64)>> = BTreeMap::new();
    for (i, (nums, strs)) in data.iter().enumerate() {
        groups
            .entry((strs[0].clone(), nums[0] as u64))
            .or_default()
            .push((i, nums[1], nums[2]));
    }
    let mut fig = Figure::new(
        "Code-family comparison under biased noise",
        "p_Z",
        "logical error rate",
    )
    .log_x()
    .log_y();
    for ((family, d_z), mut entries) in groups {
        entries.sort_by(|a, b| a.1.total_cmp(&b.1));
        let pts: Vec<(f64, f64)> = entries.iter().map(|&(_, p, r)| (p, r)).collect();
        let mut series = Series::new(format!("{family}, d_z = {d_z}"), pts);
        if let Some((lo, hi)) = &ci {
            series =
                series.with_errors(entries.iter().map(|&(i, _, _)| (lo[i], hi[i])).collect());
        }
        fig.series.push(series);
    }
    Ok(fig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{cell, num, Table as T};
    use std::fs;

    fn write_csv(dir: &std::path::Path, name: &str, t: &T) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, t.to_csv()).unwrap();
        p
    }

    #[test]
    fn threshold_figure_draws_a_dashed_crossing_line() {
        // Synthetic curves rate = 0.1 (p / 5e-4)^d cross exactly at 5e-4.
        let dir = tempfile::tempdir().unwrap();
        let mut t = T::new(&["d_z", "p", "rate", "ci_low", "ci_high"]);
        for d in [3usize, 5, 7] {
            for &p in &[2e-4, 5e-4, 1e-3] {
                let rate = 0.1 * (p / 5e-4_f64).powi(d as i32);
                t.push(vec![cell(d), num(p), num(rate), num(rate * 0.9), num(rate * 1.1)]);
            }
        }
        let path = write_csv(dir.path(), "th.csv", &t);
        let svg = build(PlotKind::Fig4, &[path]).unwrap();
        assert!(svg.contains("stroke-dasharray"), "threshold line missing");
        assert!(svg.contains("threshold"));
        assert!(svg.matches("<polyline").count() >= 3);
    }

    #[test]
    fn missing_column_is_reported_by_name() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = T::new(&["d_z", "p"]);
        t.push(vec![cell(3), num(1e-3)]);
        let path = write_csv(dir.path(), "bad.csv", &t);
        let err = build(PlotKind::Fig4, &[path]).unwrap_err();
        match err {
            CliError::MissingColumn { column, .. } => assert_eq!(column, "rate"),
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn overhead_figure_shades_between_bias_curves() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = T::new(&["target", "kind", "p", "p_z", "eta", "qubits"]);
        for &(eta, scale) in &[(1e3, 3.0), (1e4, 1.0)] {
            for &p_z in &[1e-3, 2e-3, 4e-3] {
                let qubits = scale * 200.0 * (p_z / 1e-3);
                t.push(vec![
                    num(1e-10),
                    "biased".into(),
                    num(f64::NAN),
                    num(p_z),
                    num(eta),
                    num(qubits),
                ]);
            }
        }
        for &p in &[1e-3, 2e-3] {
            t.push(vec![
                num(1e-10),
                "unbiased".into(),
                num(p),
                num(f64::NAN),
                num(f64::NAN),
                num(900.0 * p / 1e-3),
            ]);
        }
        let path = write_csv(dir.path(), "ov.csv", &t);
        let svg = build(PlotKind::Fig7, &[path]).unwrap();
        assert!(svg.contains("fill-opacity=\"0.25\""), "band missing:\n{svg}");
        assert!(svg.contains("unbiased"));
    }

    #[test]
    fn family_comparison_merges_multiple_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = T::new(&["family", "d_z", "p", "rate"]);
        let mut b = T::new(&["family", "d_z", "p", "rate"]);
        for &p in &[1e-3, 3e-3] {
            a.push(vec!["css_rotated".into(), cell(3), num(p), num(p * 30.0)]);
            b.push(vec!["xzzx_unrotated".into(), cell(3), num(p), num(p * 10.0)]);
        }
        let pa = write_csv(dir.path(), "a.csv", &a);
        let pb = write_csv(dir.path(), "b.csv", &b);
        let svg = build(PlotKind::Fig11c, &[pa, pb]).unwrap();
        assert!(svg.contains("css_rotated"));
        assert!(svg.contains("xzzx_unrotated"));
    }

    #[test]
    fn empty_input_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let t = T::new(&["gate", "alpha_sq", "eta"]);
        let path = write_csv(dir.path(), "empty.csv", &t);
        assert!(matches!(
            build(PlotKind::Fig3c, &[path]),
            Err(CliError::Data(_))
        ));
        assert!(matches!(build(PlotKind::Fig3c, &[]), Err(CliError::Data(_))));
    }
}
