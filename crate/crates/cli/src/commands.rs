use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use lfpp_core::experiments::run_named;
use lfpp_core::gff::io::{read_field, write_field};
use lfpp_core::gff::{mollify_localized, sample_dirichlet_gff, sample_torus_gff, Mollifier, Params};
use lfpp_core::metric::{build_weighted_grid, dist_point, Region};
use lfpp_core::renorm::{estimate_ladder, fit_exponent, scaling_ratio, EstimateCache, MCConfig, MedianEstimate};
use lfpp_core::{LatticeSpec, Point};

use crate::args::{
    AEpsArgs, CacheOp, Cli, Command, DistArgs, ExpArgs, FieldOp, FitArgs, Kind, LatticeArgs, McArgs, RatioArgs,
    SampleArgs,
};
use crate::cache::{DiskCache, KeyMaterial};
use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_json, Manifest};

const ESTIMATE_KIND: &str = "median_estimate";

pub fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.threads {
        Some(0) => Err(CliError::Invalid("--threads must be positive".into())),
        Some(t) => {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(|e| CliError::Runtime(e.to_string()))?;
            pool.install(|| run(cli.command))
        }
        None => run(cli.command),
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Field { op: FieldOp::Sample(a) } => field_sample(a),
        Command::Dist(a) => dist(a),
        Command::AEps(a) => a_eps(a),
        Command::Fit(a) => fit(a),
        Command::Ratio(a) => ratio(a),
        Command::Exp(a) => exp(a),
        Command::Cache { op: CacheOp::Info } => {
            let index = DiskCache::from_env()?.index();
            print_json(&index)
        }
    }
}

fn lattice(a: &LatticeArgs) -> CliResult<LatticeSpec> {
    let spec = if a.spacing == "auto" {
        LatticeSpec::auto(a.n)?
    } else {
        let s: f64 = a
            .spacing
            .parse()
            .map_err(|_| CliError::Invalid(format!("--spacing {:?} is neither `auto` nor a number", a.spacing)))?;
        LatticeSpec::centered(a.n, s)?
    };
    Ok(spec)
}

fn numbers(s: &str, count: usize, what: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Invalid(format!("{what}: cannot parse {s:?}")))?;
    if v.len() != count {
        return Err(CliError::Invalid(format!("{what}: expected {count} numbers, got {}", v.len())));
    }
    Ok(v)
}

fn point(s: &str, what: &str) -> CliResult<Point> {
    let v = numbers(s, 2, what)?;
    Ok(Point::new(v[0], v[1]))
}

fn region(s: &str) -> CliResult<Region> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    Ok(match kind {
        "unit" => Region::unit_square(),
        "annulus" => {
            let v = numbers(rest, 4, "--within annulus")?;
            Region::annulus(Point::new(v[0], v[1]), v[2], v[3])?
        }
        "disk" => {
            let v = numbers(rest, 3, "--within disk")?;
            Region::disk(Point::new(v[0], v[1]), v[2])
        }
        "rect" => {
            let v = numbers(rest, 4, "--within rect")?;
            Region::rect(Point::new(v[0], v[1]), Point::new(v[2], v[3]))
        }
        other => return Err(CliError::Invalid(format!("unknown region kind {other:?}"))),
    })
}

fn whole_lattice(spec: &LatticeSpec) -> Region {
    let o = spec.origin();
    let far = (spec.n() - 1) as f64 * spec.spacing();
    Region::rect(o, Point::new(o.x + far, o.y + far))
}

fn params(xi: f64) -> CliResult<Params> {
    Ok(Params::new(xi)?)
}

fn field_sample(a: SampleArgs) -> CliResult<()> {
    let start = Instant::now();
    let spec = lattice(&a.lattice)?;
    let field = match a.kind {
        Kind::Torus => sample_torus_gff(&spec, a.seed)?,
        Kind::Dirichlet => sample_dirichlet_gff(&spec, a.seed)?,
    };
    let mut bytes = Vec::new();
    write_field(&field, &mut bytes)?;
    write_atomic(&a.out, &bytes)?;
    let resolved = json!({
        "kind": format!("{:?}", a.kind).to_lowercase(),
        "n": spec.n(),
        "spacing": spec.spacing(),
        "origin": spec.origin(),
        "seed": a.seed,
    });
    let mut m = Manifest::new("field sample", resolved, Some(a.seed));
    m.runtime_secs = start.elapsed().as_secs_f64();
    m.write_for(&a.out)
}

fn dist(a: DistArgs) -> CliResult<()> {
    let start = Instant::now();
    let p = params(a.xi)?;
    let field = read_field(std::fs::File::open(&a.field)?)?;
    let spec = field.spec;
    let moll = if a.localized { mollify_localized(&field, a.eps)? } else { Mollifier::new(&field).mollify(a.eps)? };
    let reg = match &a.within {
        Some(s) => region(s)?,
        None => whole_lattice(&spec),
    };
    let grid = build_weighted_grid(&moll, p.xi, &reg)?;
    let (z, w) = (point(&a.from, "--from")?, point(&a.to, "--to")?);
    let res = dist_point(&grid, z, w, a.emit_path.is_some())?;
    let result = json!({
        "value": res.value.finite(),
        "finite": res.value.is_finite(),
        "settled": res.settled,
        "path_sites": res.path.as_ref().map(|p| p.sites.len()),
    });
    if let (Some(path_out), Some(path)) = (&a.emit_path, &res.path) {
        let mut csv = String::from("idx,x,y,cum_length\n");
        let mut cum = 0.0;
        for (i, s) in path.sites.iter().enumerate() {
            if i > 0 {
                cum += grid.edge_weight(path.sites[i - 1], *s).expect("path edges are grid edges");
            }
            let q = spec.site_point(*s);
            writeln!(csv, "{i},{:?},{:?},{cum:?}", q.x, q.y).expect("string write");
        }
        write_atomic(path_out, csv.as_bytes())?;
    }
    let resolved = json!({
        "field": a.field,
        "field_seed": field.seed,
        "eps": a.eps,
        "xi": a.xi,
        "from": z,
        "to": w,
        "within": a.within,
        "localized": a.localized,
        "emit_path": a.emit_path,
    });
    let mut m = Manifest::new("dist", resolved, Some(field.seed));
    m.flag_xi(&p);
    m.runtime_secs = start.elapsed().as_secs_f64();
    match &a.out {
        Some(out) => {
            write_json(out, &result)?;
            m.write_for(out)
        }
        None => print_json(&result),
    }
}

fn mc_config(a: &McArgs) -> CliResult<MCConfig> {
    let mut mc = MCConfig::new(a.trials, a.seed, lattice(&a.lattice)?);
    mc.localized = a.localized;
    Ok(mc)
}

fn mc_json(mc: &MCConfig) -> Value {
    json!({
        "n": mc.lattice.n(),
        "spacing": mc.lattice.spacing(),
        "origin": mc.lattice.origin(),
        "trials": mc.trials,
        "seed": mc.master_seed,
        "localized": mc.localized,
    })
}

fn estimate_key(e: f64, p: &Params, mc: &MCConfig) -> String {
    let o = mc.lattice.origin();
    KeyMaterial::new("a-eps")
        .float("eps", e)
        .float("xi", p.xi)
        .value("n", mc.lattice.n())
        .float("spacing", mc.lattice.spacing())
        .float("origin_x", o.x)
        .float("origin_y", o.y)
        .value("trials", mc.trials)
        .value("seed", mc.master_seed)
        .value("localized", mc.localized)
        .digest()
}

/// Estimates for `eps`, reading and filling the disk cache unless disabled. Returns the
/// number of cache hits alongside.
fn cached_estimates(
    eps: &[f64],
    p: &Params,
    mc: &MCConfig,
    use_cache: bool,
) -> CliResult<(Vec<MedianEstimate>, usize)> {
    let cache = if use_cache { Some(DiskCache::from_env()?) } else { None };
    let mut found: Vec<Option<MedianEstimate>> =
        eps.iter().map(|&e| cache.as_ref().and_then(|c| c.lookup(&estimate_key(e, p, mc), ESTIMATE_KIND))).collect();
    let hits = found.iter().filter(|f| f.is_some()).count();
    let missing: Vec<f64> = eps.iter().zip(&found).filter(|(_, f)| f.is_none()).map(|(e, _)| *e).collect();
    if !missing.is_empty() {
        let fresh = estimate_ladder(&missing, p, mc)?;
        for est in fresh {
            if let Some(c) = &cache {
                c.store(&estimate_key(est.epsilon, p, mc), ESTIMATE_KIND, &est)?;
            }
            for (e, slot) in eps.iter().zip(found.iter_mut()) {
                if slot.is_none() && *e == est.epsilon {
                    *slot = Some(est);
                }
            }
        }
    }
    Ok((found.into_iter().map(|f| f.expect("filled")).collect(), hits))
}

fn a_eps(a: AEpsArgs) -> CliResult<()> {
    let start = Instant::now();
    let p = params(a.xi)?;
    let mc = mc_config(&a.mc)?;
    let (ests, hits) = cached_estimates(&a.eps, &p, &mc, !a.mc.no_cache)?;
    if ests.len() == 1 {
        write_json(&a.out, &ests[0])?;
    } else {
        write_json(&a.out, &ests)?;
    }
    let resolved = json!({ "xi": a.xi, "eps": a.eps, "mc": mc_json(&mc) });
    let mut m = Manifest::new("a-eps", resolved, Some(mc.master_seed));
    m.flag_xi(&p);
    m.cache_hits = Some(hits);
    m.runtime_secs = start.elapsed().as_secs_f64();
    m.write_for(&a.out)
}

fn load_estimates(dir: &Path) -> CliResult<Vec<MedianEstimate>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".manifest.json")
        })
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", f.display())))?;
        let items = match v {
            Value::Array(a) => a,
            other => vec![other],
        };
        for item in items {
            let est: MedianEstimate = serde_json::from_value(item)
                .map_err(|e| CliError::Invalid(format!("{}: not a median estimate: {e}", f.display())))?;
            out.push(est);
        }
    }
    Ok(out)
}

fn fit(a: FitArgs) -> CliResult<()> {
    let start = Instant::now();
    let ests = load_estimates(&a.input)?;
    let Some(first) = ests.first() else {
        return Err(CliError::Invalid(format!("no estimates in {}", a.input.display())));
    };
    if ests.iter().any(|e| e.xi != first.xi) {
        return Err(CliError::Invalid("estimates mix different xi values".into()));
    }
    let p = params(first.xi)?;
    let fit = fit_exponent(&ests, &p)?;
    write_json(&a.out, &fit)?;
    let resolved = json!({ "in": a.input, "estimates": ests.len(), "xi": first.xi });
    let mut m = Manifest::new("fit", resolved, None);
    m.flag_xi(&p);
    m.runtime_secs = start.elapsed().as_secs_f64();
    m.write_for(&a.out)
}

fn ratio(a: RatioArgs) -> CliResult<()> {
    let start = Instant::now();
    let p = params(a.xi)?;
    let mc = mc_config(&a.mc)?;
    let mut all: Vec<f64> = a.eps.iter().flat_map(|&e| [e, e / a.r]).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let (ests, hits) = cached_estimates(&all, &p, &mc, !a.mc.no_cache)?;
    let mem = EstimateCache::new();
    for e in ests {
        mem.insert(e, &p, &mc);
    }
    let series = scaling_ratio(&a.eps, a.r, &p, &mc, a.q_hat, &mem)?;
    write_json(&a.out, &series)?;
    let resolved = json!({ "xi": a.xi, "eps": a.eps, "r": a.r, "q_hat": a.q_hat, "mc": mc_json(&mc) });
    let mut m = Manifest::new("ratio", resolved, Some(mc.master_seed));
    m.flag_xi(&p);
    m.cache_hits = Some(hits);
    m.runtime_secs = start.elapsed().as_secs_f64();
    m.write_for(&a.out)
}

fn first_seed(config: &Value) -> Option<u64> {
    ["/mc/seed", "/field/seed", "/field_seed"].iter().find_map(|p| config.pointer(p).and_then(Value::as_u64))
}

fn exp(a: ExpArgs) -> CliResult<()> {
    let start = Instant::now();
    let config = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Invalid(format!("malformed config {}: {e}", path.display())))?
        }
        None => Value::Object(Default::default()),
    };
    let report = run_named(&a.name, config)?;
    // Timing lives in the manifest so the report is byte-identical across reruns.
    let mut body = serde_json::to_value(&report).expect("serializable");
    body.as_object_mut().expect("object").remove("runtime_secs");
    write_json(&a.out, &body)?;
    if let Some(csv) = &a.csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_atomic(csv, &buf)?;
        if a.emit_gnuplot {
            write_atomic(&csv.with_extension("gp"), gnuplot(csv, report.columns.len()).as_bytes())?;
        }
    }
    let resolved = report.params.get("config").cloned().unwrap_or(Value::Null);
    let mut m = Manifest::new(&format!("exp {}", a.name), resolved.clone(), first_seed(&resolved));
    if let Some(xi) = resolved.get("xi").and_then(Value::as_f64) {
        m.flag_xi(&params(xi)?);
    }
    m.runtime_secs = start.elapsed().as_secs_f64();
    m.write_for(&a.out)
}

fn gnuplot(csv: &Path, columns: usize) -> String {
    let name = csv.file_name().and_then(|n| n.to_str()).unwrap_or("rows.csv");
    format!(
        "set datafile separator ','\nset key autotitle columnhead\n\
         plot for [i=2:{columns}] '{name}' using 1:i with linespoints\n"
    )
}

/// Pretty JSON on stdout. A closed pipe (`| head`) is not an error.
fn print_json<T: serde::Serialize>(v: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
