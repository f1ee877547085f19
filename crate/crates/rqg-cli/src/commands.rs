//! The five subcommands: argument interpretation, computation, emission.

use std::cmp::Reverse;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde_json::json;

use rqg_core::{
    approx_transmission, argmax_over_p, classify_all, exact_profile, expand_shorthand,
    graphfile, lead_preserving_automorphisms, mc_profile, open_kne, scatter, CurvePoint,
    EdgeCountProfile, OpenQuantumGraph, RqgError, RqgEstimate, ScatterError, SubgraphMask,
    DEFAULT_ENUMERATION_LIMIT,
};

use crate::sink::{fmt_f64, open_output, profile_sidecar, write_record, Format, Meta};
use crate::{ClassifyArgs, Failure, McArgs, ScatterArgs, SurfaceArgs, Table2Args};

/// How far `argmax_over_p` scans: the finest supported grid, so reported
/// maxima are stable to three decimals.
const P_SCAN_STEP: f64 = 0.001;

/// Vertex-permutation search is brute force; beyond this it stops being
/// interactive.
const CLASSIFY_MAX_VERTICES: usize = 10;

pub fn cmd_scatter(args: &ScatterArgs) -> Result<i32, Failure> {
    let host = load_graph(&args.graph)?;
    let target = match &args.mask {
        Some(text) => {
            let mask = SubgraphMask::from_hex(text, host.edge_count())
                .map_err(|e| Failure::Usage(e.to_string()))?;
            host.apply_mask(mask).map_err(|e| Failure::Usage(e.to_string()))?
        }
        None => host,
    };
    let (entrance, exit) = two_channels(&target)?;
    let grid = args.kl.values();
    let points: Vec<CurvePoint> = run_in_pool(args.threads, || {
        grid.par_iter()
            .map(|&k| CurvePoint {
                k,
                result: match scatter(&target, k, entrance, exit) {
                    Ok(result) => Some(result),
                    Err(ScatterError::SingularAtK { .. }) => None,
                    Err(other) => unreachable!(
                        "scatter arguments were validated up front: {other}"
                    ),
                },
            })
            .collect()
    })?;

    let mut meta = Meta::new("scatter");
    meta.push("graph", &args.graph);
    if let Some(mask) = &args.mask {
        meta.push("mask", mask);
    }
    meta.push("kl", args.kl.text());

    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Csv => {
            meta.write_csv_header(&mut out)?;
            writeln!(out, "kl,T,R,flux_defect,flagged")?;
            for pt in &points {
                match &pt.result {
                    Some(r) => writeln!(
                        out,
                        "{},{},{},{},0",
                        fmt_f64(pt.k),
                        fmt_f64(r.transmission),
                        fmt_f64(r.reflection),
                        fmt_f64(r.flux_defect)
                    )?,
                    None => writeln!(out, "{},,,,1", fmt_f64(pt.k))?,
                }
            }
        }
        Format::Records => {
            meta.write_record(&mut out)?;
            for pt in &points {
                let value = match &pt.result {
                    Some(r) => json!({
                        "type": "row",
                        "kl": pt.k,
                        "T": r.transmission,
                        "R": r.reflection,
                        "flux_defect": r.flux_defect,
                        "flagged": false,
                    }),
                    None => json!({
                        "type": "row",
                        "kl": pt.k,
                        "T": null,
                        "R": null,
                        "flux_defect": null,
                        "flagged": true,
                    }),
                };
                write_record(&mut out, &value)?;
            }
        }
    }
    out.flush()?;
    Ok(if points.iter().any(|p| p.result.is_none()) {
        3
    } else {
        0
    })
}

pub fn cmd_rqg_exact(args: &SurfaceArgs) -> Result<i32, Failure> {
    let host = load_graph(&args.graph)?;
    let mut meta = Meta::new("rqg-exact");
    meta.push("graph", &args.graph);
    meta.push("kl", args.kl.text());
    meta.push("p", args.p.text());
    let estimates = surface_estimates(args, |k| exact_profile(&host, k))?;
    emit_surface(args, meta, &estimates)?;
    Ok(0)
}

pub fn cmd_rqg_mc(args: &McArgs) -> Result<i32, Failure> {
    let host = load_graph(&args.surface.graph)?;
    let mut meta = Meta::new("rqg-mc");
    meta.push("graph", &args.surface.graph);
    meta.push("kl", args.surface.kl.text());
    meta.push("p", args.surface.p.text());
    meta.push("cap", args.cap);
    meta.push("seed", args.seed);
    let estimates = surface_estimates(&args.surface, |k| {
        mc_profile(&host, k, args.cap, args.seed)
    })?;
    emit_surface(&args.surface, meta, &estimates)?;
    Ok(0)
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<i32, Failure> {
    let host = load_graph(&args.graph)?;
    if host.vertex_count() > CLASSIFY_MAX_VERTICES {
        return Err(Failure::TooLarge(format!(
            "classification handles hosts of at most {CLASSIFY_MAX_VERTICES} vertices, got {}",
            host.vertex_count()
        )));
    }
    if host.edge_count() > DEFAULT_ENUMERATION_LIMIT {
        return Err(Failure::TooLarge(format!(
            "classification enumerates all 2^{} subgraphs of this host; the ceiling is 2^{DEFAULT_ENUMERATION_LIMIT}",
            host.edge_count()
        )));
    }
    let group_order = lead_preserving_automorphisms(&host).len();
    let mut classes = classify_all(&host).map_err(|e| Failure::Usage(e.to_string()))?;
    classes.sort_by_key(|c| (Reverse(c.edge_count), c.representative));

    let mut totals: Vec<(usize, u64)> = Vec::new();
    for class in &classes {
        match totals.last_mut() {
            Some((l, count)) if *l == class.edge_count => *count += class.orbit_size as u64,
            _ => totals.push((class.edge_count, class.orbit_size as u64)),
        }
    }

    let mut meta = Meta::new("classify");
    meta.push("graph", &args.graph);
    meta.push("automorphism group order", group_order);

    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Csv => {
            meta.write_csv_header(&mut out)?;
            writeln!(out, "edge_count,orbit_size,representative_mask_hex")?;
            for class in &classes {
                writeln!(
                    out,
                    "{},{},{}",
                    class.edge_count,
                    class.orbit_size,
                    class.representative.to_hex()
                )?;
            }
            for (l, count) in &totals {
                writeln!(out, "# total edge_count={l}: {count}")?;
            }
            writeln!(out, "# classes: {}", classes.len())?;
        }
        Format::Records => {
            meta.write_record(&mut out)?;
            for class in &classes {
                write_record(
                    &mut out,
                    &json!({
                        "type": "class",
                        "edge_count": class.edge_count,
                        "orbit_size": class.orbit_size,
                        "representative_mask_hex": class.representative.to_hex(),
                    }),
                )?;
            }
            for (l, count) in &totals {
                write_record(
                    &mut out,
                    &json!({"type": "total", "edge_count": l, "subgraphs": count}),
                )?;
            }
            write_record(
                &mut out,
                &json!({"type": "summary", "classes": classes.len()}),
            )?;
        }
    }
    out.flush()?;
    Ok(0)
}

pub fn cmd_table2(args: &Table2Args) -> Result<i32, Failure> {
    let mut meta = Meta::new("table2");
    meta.push("cap", args.cap);
    meta.push("seed", args.seed);

    let rows = run_in_pool(args.threads, || -> Result<_, RqgError> {
        let mut rows = Vec::new();
        for n in [6usize, 7, 8] {
            let host = open_kne(n, 1.0)?;
            for kl in [PI / 8.0, PI] {
                let (p_m, t_m) = argmax_over_p(&host, kl, args.cap, args.seed, P_SCAN_STEP)?;
                rows.push((n, kl, p_m, t_m));
            }
        }
        Ok(rows)
    })?
    .map_err(rqg_failure)?;

    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Csv => {
            meta.write_csv_header(&mut out)?;
            writeln!(out, "n,kl,p_m,T_m")?;
            for (n, kl, p_m, t_m) in &rows {
                writeln!(
                    out,
                    "{n},{},{},{}",
                    fmt_f64(*kl),
                    fmt_f64(*p_m),
                    fmt_f64(*t_m)
                )?;
            }
        }
        Format::Records => {
            meta.write_record(&mut out)?;
            for (n, kl, p_m, t_m) in &rows {
                write_record(
                    &mut out,
                    &json!({"type": "row", "n": n, "kl": kl, "p_m": p_m, "T_m": t_m}),
                )?;
            }
        }
    }
    out.flush()?;
    Ok(0)
}

/// A family shorthand expands directly; anything else is read as a graph
/// definition file.
fn load_graph(spec: &str) -> Result<OpenQuantumGraph, Failure> {
    if let Some(expanded) = expand_shorthand(spec) {
        return expanded.map_err(|e| Failure::Usage(e.to_string()));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Failure::Usage(format!("cannot read graph file `{spec}`: {e}")))?;
    graphfile::parse(&text).map_err(|e| Failure::Usage(e.to_string()))
}

fn two_channels(g: &OpenQuantumGraph) -> Result<(usize, usize), Failure> {
    match g.leads() {
        [entrance, exit, ..] => Ok((*entrance, *exit)),
        _ => Err(Failure::Usage(
            "this command needs a graph with two leads".to_string(),
        )),
    }
}

/// One profile per wavenumber, sequential in k (each profile parallelizes
/// internally), weighted over the p grid.
fn surface_estimates(
    args: &SurfaceArgs,
    profile_at: impl Fn(f64) -> Result<EdgeCountProfile, RqgError> + Send + Sync,
) -> Result<Vec<RqgEstimate>, Failure> {
    let p_grid = args.p.values();
    run_in_pool(args.threads, || {
        args.kl
            .values()
            .into_iter()
            .map(|k| approx_transmission(&profile_at(k)?, &p_grid))
            .collect::<Result<Vec<_>, _>>()
    })?
    .map_err(rqg_failure)
}

fn emit_surface(args: &SurfaceArgs, meta: Meta, estimates: &[RqgEstimate]) -> Result<(), Failure> {
    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Csv => {
            meta.write_csv_header(&mut out)?;
            writeln!(out, "kl,p,T")?;
            for est in estimates {
                for (p, t) in est.p_grid.iter().zip(&est.values) {
                    writeln!(
                        out,
                        "{},{},{}",
                        fmt_f64(est.profile.k),
                        fmt_f64(*p),
                        fmt_f64(*t)
                    )?;
                }
            }
            out.flush()?;
            match args.output.as_deref() {
                Some(path) => {
                    let mut side = open_output(Some(&profile_sidecar(path)))?;
                    meta.write_csv_header(&mut side)?;
                    writeln!(side, "kl,edge_count,sample_count,mean_T,flagged")?;
                    write_profile_csv(&mut side, estimates, "")?;
                    side.flush()?;
                }
                None => {
                    // No sidecar on stdout; append the profile as comments so
                    // the surface stays the one machine-readable table.
                    writeln!(out, "# profile kl,edge_count,sample_count,mean_T,flagged")?;
                    write_profile_csv(&mut out, estimates, "# profile ")?;
                    out.flush()?;
                }
            }
        }
        Format::Records => {
            meta.write_record(&mut out)?;
            for est in estimates {
                for (p, t) in est.p_grid.iter().zip(&est.values) {
                    write_record(
                        &mut out,
                        &json!({"type": "surface", "kl": est.profile.k, "p": p, "T": t}),
                    )?;
                }
            }
            for est in estimates {
                write_profile_records(&mut out, est)?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn write_profile_csv(
    out: &mut dyn Write,
    estimates: &[RqgEstimate],
    prefix: &str,
) -> std::io::Result<()> {
    for est in estimates {
        for (l, stats) in est.profile.per_edge_count.iter().enumerate() {
            writeln!(
                out,
                "{prefix}{},{},{},{},{}",
                fmt_f64(est.profile.k),
                l,
                stats.sample_count,
                fmt_f64(stats.mean_transmission),
                stats.flagged
            )?;
        }
    }
    Ok(())
}

fn write_profile_records(out: &mut dyn Write, est: &RqgEstimate) -> std::io::Result<()> {
    for (l, stats) in est.profile.per_edge_count.iter().enumerate() {
        write_record(
            out,
            &json!({
                "type": "profile",
                "kl": est.profile.k,
                "edge_count": l,
                "sample_count": stats.sample_count,
                "mean_T": stats.mean_transmission,
                "flagged": stats.flagged,
            }),
        )?;
    }
    Ok(())
}

fn rqg_failure(e: RqgError) -> Failure {
    match e {
        RqgError::EnumerationTooLarge { .. } => {
            Failure::TooLarge(format!("{e}; rqg-mc handles hosts of this size"))
        }
        RqgError::TooManyFlagged { .. } => Failure::Aborted(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn run_in_pool<T: Send>(
    threads: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T, Failure> {
    match threads {
        None => Ok(work()),
        Some(0) => Err(Failure::Usage("--threads must be at least 1".to_string())),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Usage(format!("cannot build a {n}-thread pool: {e}")))?
            .install(work)),
    }
}
