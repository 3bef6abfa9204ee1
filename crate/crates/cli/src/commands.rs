use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use polyknot::anneal::{anneal_chains, AnnealSchedule};
use polyknot::fitting::{fit_decay, linear_fit, scale_correspondence};
use polyknot::homfly::{classify, homfly_of_knot};
use polyknot::io::{fmt17, fmt4, format_knot, read_knot, Real};
use polyknot::montecarlo::{
    edge_scan, expected_summands, frequency_series, max_summands, radius_scan, sample, EdgeScanEntry,
    PerturbationTally,
};
use polyknot::thickness;
use polyknot::thresholds::{self, ThresholdReport};
use polyknot::tube::{boundary_csv, boundary_samples, build_cells, verify_embedded};
use polyknot::PolygonalKnot;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;
use crate::{Command, Format, HostArgs, SamplingArgs};

/// Output destination shared by the subcommands: a file with a manifest
/// sidecar, or stdout.
struct Run<'a> {
    args: &'a [String],
    started: Instant,
    inputs: Vec<PathBuf>,
    seed: Option<u64>,
}

impl Run<'_> {
    fn emit(&self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(path) => {
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                let inputs: Vec<&Path> = self.inputs.iter().map(PathBuf::as_path).collect();
                RunManifest::new(self.args, self.seed, &inputs, self.started.elapsed())?.write_beside(path)
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        b = b.num_threads(t);
    }
    Ok(b.build()?)
}

fn load_host(host: &HostArgs) -> Result<(String, PolygonalKnot, Option<PathBuf>)> {
    match (&host.host, host.ngon) {
        (Some(path), _) => Ok((path.display().to_string(), read_knot(path)?, Some(path.clone()))),
        (None, Some(n)) => Ok((format!("ngon:{n}"), PolygonalKnot::regular_ngon(n, 1.0)?, None)),
        (None, None) => bail!("one of --host or --ngon is required"),
    }
}

fn tally_csv(tallies: &[&PerturbationTally]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["host", "n", "r", "N", "seed", "polynomial", "label", "count", "frequency"])?;
    for t in tallies {
        for row in t.rows() {
            w.write_record([
                row.host,
                row.n.to_string(),
                fmt17(row.r.0),
                row.samples.to_string(),
                row.seed.to_string(),
                row.polynomial,
                row.label,
                row.count.to_string(),
                fmt17(row.frequency.0),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn check_sampling_format(s: &SamplingArgs) -> Result<()> {
    if s.format == Format::Table {
        bail!("sampling output supports --format csv or json");
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanRadiusEntry<'a> {
    radius: Real,
    distinct: usize,
    tally: &'a PerturbationTally,
}

#[derive(Serialize)]
struct EdgeScanOutput<'a> {
    entries: &'a [EdgeScanEntry],
    unknot: Vec<(usize, Real)>,
    trefoil: Vec<(usize, Real)>,
    figure_eight: Vec<(usize, Real)>,
    max_summands: usize,
    expected_summands: Vec<(usize, usize)>,
}

fn series(entries: &[EdgeScanEntry], pred: impl Fn(&str) -> bool + Copy) -> Vec<(usize, Real)> {
    frequency_series(entries, pred).into_iter().map(|(n, f)| (n, Real(f))).collect()
}

fn thresholds_table(r: &ThresholdReport) -> String {
    let mut s = String::new();
    let rows = [
        ("edge", r.edge.0),
        ("R", r.radius.0),
        ("t4", r.t4.0),
        ("t5", r.t5.0),
        ("t6", r.t6.0),
        ("R/E", r.edge_units.radius.0),
        ("t4/E", r.edge_units.t4.0),
        ("t5/E", r.edge_units.t5.0),
        ("t6/E", r.edge_units.t6.0),
    ];
    for (name, v) in rows {
        let _ = writeln!(s, "{name:<6}{}", fmt4(v));
    }
    let _ = writeln!(s, "trefoil band       [{}, {})", fmt4(r.trefoil_band.lower.0), fmt4(r.trefoil_band.upper.0));
    let _ = writeln!(s, "trefoil/fig8 band  [{}, {})", fmt4(r.tref_fig8_band.lower.0), fmt4(r.tref_fig8_band.upper.0));
    s
}

#[derive(Deserialize)]
struct CsvRow {
    n: usize,
    label: String,
    frequency: f64,
}

fn read_series(path: &Path) -> Result<BTreeMap<usize, BTreeMap<String, f64>>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out: BTreeMap<usize, BTreeMap<String, f64>> = BTreeMap::new();
    for row in r.deserialize() {
        let row: CsvRow = row?;
        *out.entry(row.n).or_default().entry(row.label).or_insert(0.0) += row.frequency;
    }
    Ok(out)
}

fn label_series(data: &BTreeMap<usize, BTreeMap<String, f64>>, label: &str) -> Vec<(f64, f64)> {
    data.iter().map(|(&n, m)| (n as f64, m.get(label).copied().unwrap_or(0.0))).collect()
}

#[derive(Serialize)]
struct FitOutput {
    label: String,
    a: Real,
    b: Real,
    k: Real,
    l: Real,
    n0: Real,
    rss: Real,
    converged: bool,
    iterations: usize,
    excluded: usize,
    correspondence: Option<CorrespondenceOutput>,
}

#[derive(Serialize)]
struct CorrespondenceOutput {
    label: String,
    pairs: Vec<(Real, Real)>,
    dropped: Vec<Real>,
    intercept: Real,
    slope: Real,
    r_squared: Real,
}

pub fn run(command: Command, args: &[String]) -> Result<()> {
    let mut run = Run { args, started: Instant::now(), inputs: Vec::new(), seed: None };
    match command {
        Command::GenNgon { n, circumradius, edge, out } => {
            let rho = match edge {
                Some(e) => e / (2.0 * (std::f64::consts::PI / n.max(3) as f64).sin()),
                None => circumradius,
            };
            let k = PolygonalKnot::regular_ngon(n, rho)?;
            run.emit(out.as_deref(), &format_knot(&k, Some(&format!("regular {n}-gon, circumradius {}", fmt17(rho)))))
        }
        Command::Thickness { knot, format, out } => {
            let k = read_knot(&knot)?;
            run.inputs.push(knot);
            let r = thickness::report(&k)?;
            let text = match format {
                Format::Json => json(&r)?,
                Format::Table => {
                    let mut s = String::new();
                    for (name, v) in [
                        ("MinRad", r.minrad.0),
                        ("dcsd", r.dcsd.0),
                        ("scsd", r.scsd.0),
                        ("mdcsd", r.mdcsd.0),
                        ("R", r.radius.0),
                        ("Rope", r.ropelength.0),
                    ] {
                        let _ = writeln!(s, "{name:<8}{}", fmt4(v));
                    }
                    s
                }
                Format::Csv => bail!("thickness supports --format json or table"),
            };
            run.emit(out.as_deref(), &text)
        }
        Command::Thresholds { host, format, out } => {
            let report = match (&host.host, host.ngon) {
                (_, Some(n)) => thresholds::regular_ngon_report(n)?,
                (Some(path), None) => {
                    run.inputs.push(path.clone());
                    thresholds::report(&read_knot(path)?)?
                }
                (None, None) => bail!("one of --host or --ngon is required"),
            };
            let text = match format {
                Format::Json => json(&report)?,
                Format::Table => thresholds_table(&report),
                Format::Csv => bail!("thresholds supports --format json or table"),
            };
            run.emit(out.as_deref(), &text)
        }
        Command::TubeCheck { knot, radius, max_iter, boundary, per_cell, seed, out } => {
            let k = read_knot(&knot)?;
            run.inputs.push(knot);
            run.seed = Some(seed);
            let verdict = verify_embedded(&k, radius, max_iter)?;
            if let Some(path) = boundary {
                let cells = build_cells(&k, radius)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let samples = boundary_samples(&cells, per_cell, &mut rng);
                run.emit(Some(&path), &boundary_csv(&samples))?;
            }
            run.emit(out.as_deref(), &json(&verdict)?)
        }
        Command::Homfly { knot, seed } => {
            let k = read_knot(&knot)?;
            k.check_embedded()?;
            let p = homfly_of_knot(&k, seed)?;
            let c = classify(&p);
            println!("{p}");
            println!("{}", c.label);
            Ok(())
        }
        Command::Perturb { host, radius, sampling } => {
            check_sampling_format(&sampling)?;
            let (name, k, path) = load_host(&host)?;
            run.inputs.extend(path);
            run.seed = Some(sampling.seed);
            let t = pool(sampling.threads)?.install(|| sample(&k, &name, radius, sampling.samples, sampling.seed))?;
            let text = match sampling.format {
                Format::Json => json(&t)?,
                _ => tally_csv(&[&t])?,
            };
            run.emit(sampling.out.as_deref(), &text)
        }
        Command::ScanRadius { host, radii, sampling } => {
            check_sampling_format(&sampling)?;
            let (name, k, path) = load_host(&host)?;
            run.inputs.extend(path);
            run.seed = Some(sampling.seed);
            let tallies =
                pool(sampling.threads)?.install(|| radius_scan(&k, &name, &radii, sampling.samples, sampling.seed))?;
            for t in &tallies {
                eprintln!(
                    "r {}  distinct {}  unknot {}  trefoil {}",
                    fmt4(t.radius.0),
                    t.distinct(),
                    fmt4(t.unknot_frequency()),
                    fmt4(t.trefoil_frequency())
                );
            }
            let text = match sampling.format {
                Format::Json => {
                    let entries: Vec<ScanRadiusEntry> =
                        tallies.iter().map(|t| ScanRadiusEntry { radius: t.radius, distinct: t.distinct(), tally: t }).collect();
                    json(&entries)?
                }
                _ => tally_csv(&tallies.iter().collect::<Vec<_>>())?,
            };
            run.emit(sampling.out.as_deref(), &text)
        }
        Command::ScanEdges { ngons, hosts, sampling } => {
            check_sampling_format(&sampling)?;
            let mut list: Vec<(String, PolygonalKnot)> = Vec::new();
            for n in ngons {
                list.push((format!("ngon:{n}"), PolygonalKnot::regular_ngon(n, 1.0)?));
            }
            for path in hosts {
                list.push((path.display().to_string(), read_knot(&path)?));
                run.inputs.push(path);
            }
            run.seed = Some(sampling.seed);
            let entries = pool(sampling.threads)?.install(|| edge_scan(&list, sampling.samples, sampling.seed))?;
            let text = match sampling.format {
                Format::Json => {
                    let tallies: Vec<PerturbationTally> = entries.iter().map(|e| e.tally.clone()).collect();
                    json(&EdgeScanOutput {
                        entries: &entries,
                        unknot: series(&entries, |l| l == "Unknot"),
                        trefoil: series(&entries, |l| l == "Trefoil_R" || l == "Trefoil_L"),
                        figure_eight: series(&entries, |l| l == "FigureEight"),
                        max_summands: max_summands(&tallies),
                        expected_summands: entries.iter().map(|e| (e.n, expected_summands(e.n))).collect(),
                    })?
                }
                _ => tally_csv(&entries.iter().map(|e| &e.tally).collect::<Vec<_>>())?,
            };
            run.emit(sampling.out.as_deref(), &text)
        }
        Command::Anneal { input, epochs, moves, temperature, cooling, amplitude, seed, chains, threads, out, log } => {
            let k0 = read_knot(&input)?;
            run.inputs.push(input);
            run.seed = Some(seed);
            if chains == 0 {
                bail!("--chains must be at least 1");
            }
            let schedule = AnnealSchedule {
                initial_temperature: temperature,
                cooling,
                moves_per_epoch: moves,
                epochs,
                amplitude,
                seed,
                ..Default::default()
            };
            let seeds: Vec<u64> = (0..chains).map(|c| seed.wrapping_add(c)).collect();
            let result = pool(threads)?.install(|| anneal_chains(&k0, &schedule, &seeds))?;
            let comment = format!(
                "annealed, ropelength {} (from {}), chain seed {}",
                fmt17(result.best_ropelength),
                fmt17(result.initial_ropelength),
                result.seed
            );
            run.emit(Some(&out), &format_knot(&result.best, Some(&comment)))?;
            if let Some(path) = log {
                let mut text = String::from("epoch,temperature,current,best\n");
                for e in &result.log {
                    let _ = writeln!(text, "{},{},{},{}", e.epoch, fmt17(e.temperature), fmt17(e.current), fmt17(e.best));
                }
                run.emit(Some(&path), &text)?;
            }
            println!(
                "ropelength {} -> {}  accepted {}  guard rejections {}",
                fmt4(result.initial_ropelength),
                fmt4(result.best_ropelength),
                result.accepted,
                result.rejected_by_guard
            );
            Ok(())
        }
        Command::Fit { input, label, against, out } => {
            let data = read_series(&input)?;
            run.inputs.push(input);
            let points = label_series(&data, &label);
            let f = fit_decay(&points)?;
            let correspondence = match against {
                Some(other) => {
                    let a: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
                    let b: Vec<(f64, f64)> = label_series(&data, &other).into_iter().filter(|p| p.1 > 0.0).collect();
                    let c = scale_correspondence(&a, &b)?;
                    let line = linear_fit(&c.pairs)?;
                    Some(CorrespondenceOutput {
                        label: other,
                        pairs: c.pairs.iter().map(|&(x, y)| (Real(x), Real(y))).collect(),
                        dropped: c.dropped.into_iter().map(Real).collect(),
                        intercept: Real(line.intercept),
                        slope: Real(line.slope),
                        r_squared: Real(line.r_squared),
                    })
                }
                None => None,
            };
            let report = FitOutput {
                label,
                a: Real(f.a),
                b: Real(f.b),
                k: Real(f.k),
                l: Real(f.l),
                n0: Real(f.n0),
                rss: Real(f.rss),
                converged: f.converged,
                iterations: f.iterations,
                excluded: f.excluded,
                correspondence,
            };
            print!("{}", json(&report)?);
            if let Some(path) = out {
                let observed: BTreeMap<usize, f64> = points.iter().map(|&(n, p)| (n as usize, p)).collect();
                let (lo, hi) = (points[0].0 as usize, points[points.len() - 1].0 as usize);
                let mut text = String::from("n,observed,fitted\n");
                for n in lo..=hi {
                    let obs = observed.get(&n).map(|&p| fmt17(p)).unwrap_or_default();
                    let _ = writeln!(text, "{n},{obs},{}", fmt17(f.eval(n as f64)));
                }
                run.emit(Some(&path), &text)?;
            }
            Ok(())
        }
    }
}
