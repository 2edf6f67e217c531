use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use breptok::embed::{encode_tokens, tokenize_model, EmbedConfig, TokenSequence, WeightBundle};
use breptok::fixtures::{generate, FixtureParams};
use breptok::io::{load_model, load_tokens, load_weights, save_tokens, CurveJson, PCurveJson, SurfaceJson};
use breptok::spline::{BSplineCurve, BezierTriangle, CurveDim, Half};
use breptok::topology::validate_model;
use breptok::trim::{deviation_report, tessellate_trimmed, DeviationReport, FitConfig};
use breptok::BRepModel;
use serde::{Deserialize, Serialize};

use crate::{Cli, Command, Failure, GenParams, Options, ReportFormat};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let o = &cli.opts;
    match &cli.command {
        Command::Validate { input } => validate(input, o),
        Command::Decompose { input } => decompose(input, o),
        Command::Tessellate { input } => tessellate(input, o),
        Command::Order { input } => order(input, o),
        Command::Tokenize { input, weights } => tokenize(input, weights.as_deref(), o),
        Command::Embed { input, weights } => embed(input, weights.as_deref(), o),
        Command::Stats { input } => stats(input, o),
        Command::Gen { kind, params } => gen(*kind, params, o),
    }
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    if is_stdio(path) {
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let result = if is_stdio(path) {
        let mut out = io::stdout().lock();
        out.write_all(bytes).and_then(|_| out.flush())
    } else {
        fs::write(path, bytes)
    };
    result.map_err(|e| Failure::Usage(format!("writing {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Failure::Numeric(e.to_string()))?;
    bytes.push(b'\n');
    write_output(path, &bytes)
}

fn load(path: &Path) -> Result<BRepModel, Failure> {
    Ok(load_model(&read_input(path)?)?)
}

fn fit_config(o: &Options) -> Result<FitConfig, Failure> {
    let mut cfg = FitConfig::default();
    if let Some(d) = o.max_depth {
        cfg.max_depth = d;
    }
    if let Some(l) = o.lambda {
        cfg.lambda = l;
    }
    if let Some(d) = o.degree {
        cfg.working_degree = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn embed_config(o: &Options) -> Result<EmbedConfig, Failure> {
    let mut cfg = EmbedConfig {
        fit: fit_config(o)?,
        seed: o.seed,
        normalize: !o.no_normalize,
        ..EmbedConfig::default()
    };
    if let Some(r) = o.mask_ratio {
        cfg.mask_ratio = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn weights(path: Option<&Path>, cfg: &EmbedConfig, seed: u64) -> Result<WeightBundle, Failure> {
    let Some(path) = path else {
        return Ok(WeightBundle::init(cfg, seed));
    };
    let (w, warnings) = load_weights(&read_input(path)?, cfg)?;
    for msg in warnings {
        log::warn!("{msg}");
    }
    Ok(w)
}

#[derive(Serialize)]
struct ValidateOut<'a> {
    valid: bool,
    violations: &'a [breptok::topology::Violation],
}

fn validate(input: &Path, o: &Options) -> Result<(), Failure> {
    let model = load(input)?;
    let report = validate_model(&model);
    match o.report {
        ReportFormat::Json => write_json(
            &o.output,
            &ValidateOut {
                valid: report.is_valid(),
                violations: &report.violations,
            },
        )?,
        ReportFormat::Text => write_output(&o.output, report.to_string().as_bytes())?,
    }
    let hard = report.hard().count();
    if hard > 0 {
        return Err(Failure::Validation(format!("{hard} hard violation(s)")));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DecomposeInput {
    Surface(SurfaceJson),
    Curve(CurveJson),
    PCurve(PCurveJson),
}

#[derive(Serialize)]
struct Segment {
    interval: [f64; 2],
    degree: usize,
    control_points: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Cell {
    x: usize,
    y: usize,
    param_rect: [f64; 4],
    degrees: [usize; 2],
    control_points: Vec<Vec<[f64; 4]>>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Decomposed {
    Curve {
        segments: Vec<Segment>,
    },
    Surface {
        cols: usize,
        rows: usize,
        depth: u32,
        cells: Vec<Cell>,
    },
}

fn curve_segments(curve: &BSplineCurve, degree: Option<usize>) -> Result<Vec<Segment>, Failure> {
    let dims = if curve.dim() == CurveDim::Two { 2 } else { 3 };
    curve
        .decompose()
        .into_iter()
        .map(|s| {
            let bez = match degree {
                Some(d) => s.bezier.elevate(d)?,
                None => s.bezier,
            };
            Ok(Segment {
                interval: [s.interval.0, s.interval.1],
                degree: bez.degree(),
                control_points: bez
                    .control_points()
                    .iter()
                    .map(|p| p.to_array()[..dims].to_vec())
                    .collect(),
            })
        })
        .collect()
}

fn decompose(input: &Path, o: &Options) -> Result<(), Failure> {
    let doc: DecomposeInput = serde_json::from_slice(&read_input(input)?).map_err(|e| {
        Failure::Validation(format!(
            "line {} column {}: expected a curve, p-curve or surface object: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let out = match doc {
        DecomposeInput::Curve(c) => Decomposed::Curve {
            segments: curve_segments(&c.to_curve()?, o.degree)?,
        },
        DecomposeInput::PCurve(c) => Decomposed::Curve {
            segments: curve_segments(&c.to_curve()?, o.degree)?,
        },
        DecomposeInput::Surface(s) => {
            let grid = s.to_surface()?.decompose();
            let mut cells = Vec::with_capacity(grid.cells.len());
            for y in 0..grid.rows {
                for x in 0..grid.cols {
                    let mut cell = grid.cell(x, y).clone();
                    if let Some(d) = o.degree {
                        cell = cell.elevate(d, d)?;
                    }
                    let r = cell.param_rect;
                    let (p, q) = cell.degrees();
                    cells.push(Cell {
                        x,
                        y,
                        param_rect: [r.u0, r.u1, r.v0, r.v1],
                        degrees: [p, q],
                        control_points: cell
                            .control()
                            .iter()
                            .map(|row| row.iter().map(|c| [c.x, c.y, c.z, c.w]).collect())
                            .collect(),
                    });
                }
            }
            Decomposed::Surface {
                cols: grid.cols,
                rows: grid.rows,
                depth: grid.depth,
                cells,
            }
        }
    };
    write_json(&o.output, &out)
}

fn face_triangles(model: &BRepModel, cfg: &FitConfig) -> Result<Vec<(u32, Vec<BezierTriangle>)>, Failure> {
    model
        .faces
        .iter()
        .map(|f| Ok((f.id.0, tessellate_trimmed(&f.geometry, cfg)?)))
        .collect()
}

fn checked_model(input: &Path) -> Result<BRepModel, Failure> {
    let model = load(input)?;
    if let Some(v) = validate_model(&model).hard().next() {
        return Err(Failure::Validation(format!("{}: {}", v.kind, v.message)));
    }
    Ok(model)
}

#[derive(Serialize)]
struct FaceTessellation<'a> {
    face: u32,
    triangles: &'a [BezierTriangle],
    report: DeviationReport,
}

#[derive(Serialize, Default)]
struct Summary {
    faces: usize,
    triangles: usize,
    fitted: usize,
    max_deviation: f64,
    mean_exact_deviation: f64,
    max_fit_residual: f64,
    rank_deficient_fits: usize,
}

#[derive(Serialize)]
struct TessellateOut<'a> {
    faces: Vec<FaceTessellation<'a>>,
    summary: Summary,
}

fn tessellate(input: &Path, o: &Options) -> Result<(), Failure> {
    let model = checked_model(input)?;
    let cfg = fit_config(o)?;
    let per_face = face_triangles(&model, &cfg)?;
    let mut faces = Vec::with_capacity(per_face.len());
    let mut s = Summary::default();
    let mut exact_weight = 0usize;
    for ((id, tris), face) in per_face.iter().zip(&model.faces) {
        let report = deviation_report(&face.geometry, tris)?;
        if !report.max_deviation.is_finite() {
            return Err(Failure::Numeric(format!("face {id}: non-finite deviation")));
        }
        let exact = report.triangles - report.fitted;
        s.faces += 1;
        s.triangles += report.triangles;
        s.fitted += report.fitted;
        s.max_deviation = s.max_deviation.max(report.max_deviation);
        s.mean_exact_deviation += report.mean_exact_deviation * exact as f64;
        exact_weight += exact;
        s.max_fit_residual = s.max_fit_residual.max(report.max_fit_residual);
        s.rank_deficient_fits += report.rank_deficient_fits;
        faces.push(FaceTessellation {
            face: *id,
            triangles: tris,
            report,
        });
    }
    if exact_weight > 0 {
        s.mean_exact_deviation /= exact_weight as f64;
    }
    if o.report == ReportFormat::Text {
        for f in &faces {
            eprintln!(
                "face {}: {} triangles, {} fitted, max deviation {:.3e}",
                f.face, f.report.triangles, f.report.fitted, f.report.max_deviation
            );
        }
        eprintln!(
            "total: {} faces, {} triangles, {} fitted, max deviation {:.3e}, mean exact deviation {:.3e}",
            s.faces, s.triangles, s.fitted, s.max_deviation, s.mean_exact_deviation
        );
    }
    write_json(&o.output, &TessellateOut { faces, summary: s })
}

#[derive(Serialize)]
struct Patch {
    x: u32,
    y: u32,
    depth: u32,
    key: u64,
    half: Half,
}

#[derive(Serialize)]
struct FaceOrder {
    face: u32,
    patches: Vec<Patch>,
}

fn order(input: &Path, o: &Options) -> Result<(), Failure> {
    let model = checked_model(input)?;
    let cfg = fit_config(o)?;
    let mut faces = Vec::new();
    for (face, tris) in face_triangles(&model, &cfg)? {
        let patches = tris
            .iter()
            .map(|t| {
                let k = t.provenance.rect;
                Ok(Patch {
                    x: k.x,
                    y: k.y,
                    depth: k.depth,
                    key: k.key()?,
                    half: t.provenance.half,
                })
            })
            .collect::<Result<_, Failure>>()?;
        faces.push(FaceOrder { face, patches });
    }
    match o.report {
        ReportFormat::Json => write_json(&o.output, &faces),
        ReportFormat::Text => {
            let mut text = String::new();
            for f in &faces {
                let items: Vec<String> = f
                    .patches
                    .iter()
                    .map(|p| {
                        let h = if p.half == Half::LowerLeft { 'L' } else { 'U' };
                        format!("{},{}@{}{h}", p.x, p.y, p.depth)
                    })
                    .collect();
                text.push_str(&format!("face {}: {}\n", f.face, items.join(" ")));
            }
            write_output(&o.output, text.as_bytes())
        }
    }
}

fn tokenize(input: &Path, weights_path: Option<&Path>, o: &Options) -> Result<(), Failure> {
    let model = load(input)?;
    let cfg = embed_config(o)?;
    let w = weights(weights_path, &cfg, o.seed)?;
    let tokens = tokenize_model(&model, &w, &cfg)?;
    if tokens.tokens.data().iter().any(|v| !v.is_finite()) {
        return Err(Failure::Numeric("non-finite token values".into()));
    }
    log::info!("{} tokens of width {}", tokens.face_ids.len(), cfg.token_dim());
    write_output(&o.output, &save_tokens(&tokens)?)
}

fn embed(input: &Path, weights_path: Option<&Path>, o: &Options) -> Result<(), Failure> {
    let tokens = load_tokens(&read_input(input)?)?;
    let cfg = embed_config(o)?;
    let w = weights(weights_path, &cfg, o.seed)?;
    let out = encode_tokens(&tokens, &w, &cfg)?;
    if out.data().iter().any(|v| !v.is_finite()) {
        return Err(Failure::Numeric("non-finite embedding values".into()));
    }
    let seq = TokenSequence {
        face_ids: tokens.face_ids,
        tokens: out,
    };
    write_output(&o.output, &save_tokens(&seq)?)
}

/// Bucket label for a per-edge segment count.
fn bucket(n: usize) -> &'static str {
    match n {
        0..=1 => "1",
        2 => "2",
        3..=4 => "3-4",
        5..=8 => "5-8",
        9..=16 => "9-16",
        17..=32 => "17-32",
        33..=64 => "33-64",
        65..=100 => "65-100",
        _ => ">100",
    }
}

const BUCKETS: [&str; 9] = ["1", "2", "3-4", "5-8", "9-16", "17-32", "33-64", "65-100", ">100"];

#[derive(Serialize)]
struct FacePatches {
    face: u32,
    triangles: usize,
}

#[derive(Serialize)]
struct Stats {
    vertices: usize,
    edges: usize,
    loops: usize,
    faces: usize,
    shells: usize,
    inner_loops: usize,
    patches_per_face: Vec<FacePatches>,
    max_segments_per_edge: usize,
    mean_segments_per_edge: f64,
    segments_per_edge_histogram: BTreeMap<&'static str, usize>,
    edges_over_limit: usize,
    fraction_over_limit: f64,
}

fn stats(input: &Path, o: &Options) -> Result<(), Failure> {
    let model = checked_model(input)?;
    let cfg = fit_config(o)?;
    let limit = EmbedConfig::default().max_curve_seq;
    let counts: Vec<usize> = model
        .edges
        .iter()
        .map(|e| Ok(e.curve.decompose_range(e.t0, e.t1)?.len()))
        .collect::<Result<_, Failure>>()?;
    let mut histogram: BTreeMap<&'static str, usize> = BUCKETS.iter().map(|b| (*b, 0)).collect();
    for &n in &counts {
        *histogram.get_mut(bucket(n)).expect("every bucket present") += 1;
    }
    let over = counts.iter().filter(|&&n| n > limit).count();
    let edges = counts.len().max(1) as f64;
    let patches_per_face = face_triangles(&model, &cfg)?
        .into_iter()
        .map(|(face, t)| FacePatches {
            face,
            triangles: t.len(),
        })
        .collect();
    let s = Stats {
        vertices: model.vertices.len(),
        edges: model.edges.len(),
        loops: model.loops.len(),
        faces: model.faces.len(),
        shells: model.shells.len(),
        inner_loops: model.faces.iter().map(|f| f.inner_loops.len()).sum(),
        patches_per_face,
        max_segments_per_edge: counts.iter().copied().max().unwrap_or(0),
        mean_segments_per_edge: counts.iter().sum::<usize>() as f64 / edges,
        segments_per_edge_histogram: histogram,
        edges_over_limit: over,
        fraction_over_limit: over as f64 / edges,
    };
    match o.report {
        ReportFormat::Json => write_json(&o.output, &s),
        ReportFormat::Text => {
            let mut t = format!(
                "vertices {}\nedges {}\nloops {} ({} inner)\nfaces {}\nshells {}\n",
                s.vertices, s.edges, s.loops, s.inner_loops, s.faces, s.shells
            );
            t.push_str(&format!(
                "segments per edge: max {}, mean {:.2}, over {limit}: {} ({:.4}%)\n",
                s.max_segments_per_edge,
                s.mean_segments_per_edge,
                s.edges_over_limit,
                100.0 * s.fraction_over_limit
            ));
            for b in BUCKETS {
                t.push_str(&format!("  {b:>6}  {}\n", s.segments_per_edge_histogram[b]));
            }
            for p in &s.patches_per_face {
                t.push_str(&format!("face {}: {} triangles\n", p.face, p.triangles));
            }
            write_output(&o.output, t.as_bytes())
        }
    }
}

fn gen(kind: breptok::fixtures::FixtureKind, g: &GenParams, o: &Options) -> Result<(), Failure> {
    let mut p = FixtureParams {
        seed: o.seed,
        ..FixtureParams::default()
    };
    macro_rules! overlay {
        ($($f:ident),*) => {$( if let Some(v) = g.$f { p.$f = v; } )*};
    }
    overlay!(size, height, sides, holes, hole_radius, spans, amplitude);
    let doc = generate(kind, &p).map_err(|e| match e {
        breptok::Error::Geometry(m) => Failure::Usage(format!("fixture parameters: {m}")),
        other => other.into(),
    })?;
    write_json(&o.output, &doc)
}
