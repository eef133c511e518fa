//! Chart builders shared by runs and by re-rendering from CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::svg::{heat_map, histogram, Plot, Series, Style};

/// Entropy against dyadic depth with a unit-slope guide through the first point.
pub fn entropy_vs_depth(title: &str, depths: &[f64], entropies: &[f64]) -> String {
    let pts: Vec<(f64, f64)> = depths.iter().copied().zip(entropies.iter().copied()).collect();
    let mut plot = Plot::new(title, "depth", "entropy (bits)").with(Series::new("entropy", pts.clone(), Style::LineMarkers));
    if let (Some(&(d0, h0)), Some(&(d1, _))) = (pts.first(), pts.last()) {
        plot = plot.with(Series::new("slope 1", vec![(d0, h0), (d1, h0 + d1 - d0)], Style::Dashed));
    }
    plot.render()
}

/// Bottom-side entropy against generation, with the bound `n`.
pub fn gasket_entropy(ns: &[f64], entropies: &[f64]) -> String {
    Plot::new("bottom-side hitting entropy", "generation n", "entropy (bits)")
        .with(Series::new(
            "entropy",
            ns.iter().copied().zip(entropies.iter().copied()).collect(),
            Style::LineMarkers,
        ))
        .with(Series::new("bound n", ns.iter().map(|&n| (n, n)).collect(), Style::Dashed))
        .render()
}

pub fn tau_histogram(counts: &[u64], horizon: f64) -> String {
    histogram("hitting times given the barrier", "t", counts, 0.0, horizon)
}

/// Log-log tip probabilities, one marker series per Hurst index.
pub fn tip_loglog(series: &BTreeMap<String, Vec<(f64, f64)>>) -> String {
    let mut plot = Plot::new("tip hitting probability", "epsilon", "p(epsilon)").log_log();
    for (name, pts) in series {
        plot = plot.with(Series::new(name.clone(), pts.clone(), Style::LineMarkers));
    }
    plot.render()
}

pub fn gasket_heat_map(coords: &[[f64; 2]], edges: &[(usize, usize)], mass: &[Option<f64>]) -> String {
    heat_map("harmonic measure from the top vertex", coords, edges, mass)
}

type Table = (Vec<String>, Vec<Vec<String>>);

fn read_table(path: &Path) -> std::io::Result<Table> {
    let mut rdr = csv::Reader::from_path(path).map_err(std::io::Error::other)?;
    let headers = rdr.headers().map_err(std::io::Error::other)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec.map_err(std::io::Error::other)?.iter().map(String::from).collect());
    }
    Ok((headers, rows))
}

fn column<'a>(t: &'a Table, name: &str) -> std::io::Result<impl Iterator<Item = &'a str>> {
    let i = t
        .0
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| std::io::Error::other(format!("missing column {name}")))?;
    Ok(t.1.iter().map(move |r| r[i].as_str()))
}

fn floats(t: &Table, name: &str) -> std::io::Result<Vec<f64>> {
    column(t, name)?
        .map(|s| s.parse::<f64>().map_err(|e| std::io::Error::other(format!("{name}: {e}"))))
        .collect()
}

/// Regenerates every chart whose source CSV exists in `dir`; returns the
/// SVG file names written.
pub fn replot(dir: &Path) -> std::io::Result<Vec<String>> {
    let mut written = Vec::new();
    let mut emit = |name: &str, svg: String| -> std::io::Result<()> {
        fs::write(dir.join(name), svg)?;
        written.push(name.to_string());
        Ok(())
    };
    let has = |name: &str| dir.join(name).is_file();

    if has("tau_entropy.csv") {
        let t = read_table(&dir.join("tau_entropy.csv"))?;
        emit("tau_entropy.svg", entropy_vs_depth("hitting-time entropy", &floats(&t, "depth")?, &floats(&t, "entropy")?))?;
    }
    if has("tau_histogram.csv") {
        let t = read_table(&dir.join("tau_histogram.csv"))?;
        let counts: Vec<u64> = floats(&t, "count")?.into_iter().map(|c| c as u64).collect();
        let horizon = floats(&t, "t_hi")?.last().copied().unwrap_or(1.0);
        emit("tau_histogram.svg", tau_histogram(&counts, horizon))?;
    }
    if has("scan.csv") {
        let t = read_table(&dir.join("scan.csv"))?;
        let subset: Vec<&str> = column(&t, "subset")?.collect();
        let (ns, hs): (Vec<f64>, Vec<f64>) = floats(&t, "n")?
            .into_iter()
            .zip(floats(&t, "entropy_bits")?)
            .zip(subset)
            .filter(|(_, s)| *s == "bottom_side")
            .map(|(p, _)| p)
            .unzip();
        emit("gasket_entropy.svg", gasket_entropy(&ns, &hs))?;
    }
    if has("harmonic.csv") && has("gasket_edges.csv") {
        let v = read_table(&dir.join("harmonic.csv"))?;
        let coords: Vec<[f64; 2]> = floats(&v, "x")?.into_iter().zip(floats(&v, "y")?).map(|(x, y)| [x, y]).collect();
        let mass: Vec<Option<f64>> = column(&v, "mass")?.map(|s| s.parse().ok()).collect();
        let e = read_table(&dir.join("gasket_edges.csv"))?;
        let edges: Vec<(usize, usize)> = floats(&e, "u")?
            .into_iter()
            .zip(floats(&e, "v")?)
            .map(|(u, v)| (u as usize, v as usize))
            .collect();
        emit("gasket_heat_map.svg", gasket_heat_map(&coords, &edges, &mass))?;
    }
    if has("tip_points.csv") {
        let t = read_table(&dir.join("tip_points.csv"))?;
        let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        let hs: Vec<&str> = column(&t, "H")?.collect();
        for ((h, e), p) in hs.into_iter().zip(floats(&t, "epsilon")?).zip(floats(&t, "p_hat")?) {
            series.entry(format!("H = {h}")).or_default().push((e, p));
        }
        emit("tip_loglog.svg", tip_loglog(&series))?;
    }
    if has("curve_entropy.csv") {
        let t = read_table(&dir.join("curve_entropy.csv"))?;
        emit(
            "curve_entropy.svg",
            entropy_vs_depth("boundary-measure entropy", &floats(&t, "depth")?, &floats(&t, "entropy")?),
        )?;
    }
    Ok(written)
}
