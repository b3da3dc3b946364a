use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use contour_core::eval::{precision_recall_f, EvalReport};
use contour_core::multiscale::{default_bands, level_map, render_levels, threshold_level};
use contour_core::patterns::{derived_thresholds, dual_index, reference_neighborhoods};
use contour_core::pnm::{load_image, save_color, save_gray};
use contour_core::theory::{agreement_sweep, operation_count, SWEEP_LAYOUTS};
use contour_core::{
    detect_exemplar, detect_stack, schedule, synth, synthesize_pattern_pair, ContourMap, GrayImage, PatternSchedule,
    Polarity,
};

use crate::manifest;
use crate::{
    BenchArgs, DetectArgs, EvalArgs, Format, GenArgs, LevelsArgs, OutputArgs, PredSource, ScheduleArgs, SetChoice,
    SweepArgs,
};

const REFERENCES: u64 = 26;

fn schedules(args: &ScheduleArgs) -> Result<Vec<PatternSchedule>> {
    let sets: &[Polarity] = match args.set {
        SetChoice::One => &[Polarity::Set1],
        SetChoice::Two => &[Polarity::Set2],
        SetChoice::Both => &[Polarity::Set1, Polarity::Set2],
    };
    sets.iter()
        .map(|&p| schedule(args.delta_l, p).map_err(Into::into))
        .collect()
}

fn set_name(p: Polarity) -> &'static str {
    match p {
        Polarity::Set1 => "set1",
        Polarity::Set2 => "set2",
    }
}

fn prepare_out(output: &OutputArgs) -> Result<()> {
    fs::create_dir_all(&output.out).with_context(|| format!("creating {}", output.out.display()))
}

/// Writes `report.json` into the output directory and echoes it to stdout.
fn write_report(dir: &Path, report: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    let path = dir.join("report.json");
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

/// Saves a contour map and/or its overlay according to `format`.
fn save_map(
    output: &OutputArgs,
    stem: &str,
    map: &ContourMap,
    img: &GrayImage,
) -> Result<(Option<String>, Option<String>)> {
    let mut written = (None, None);
    if output.format == Format::Pgm {
        let p = output.out.join(format!("{stem}.pgm"));
        save_gray(&map.to_gray(), &p)?;
        written.0 = Some(path_string(&p));
    }
    if output.format != Format::Json {
        let p = output.out.join(format!("{stem}_overlay.ppm"));
        save_color(&map.overlay(img)?, &p)?;
        written.1 = Some(path_string(&p));
    }
    Ok(written)
}

#[derive(Serialize)]
struct PatternEntry {
    index: usize,
    bg: u8,
    fg: u8,
    threshold: u8,
    image: Option<String>,
    marked: Option<String>,
}

#[derive(Serialize)]
struct PatternSet {
    set: &'static str,
    patterns: Vec<PatternEntry>,
}

#[derive(Serialize)]
struct GenReport {
    command: &'static str,
    delta_l: u32,
    canvas: usize,
    sets: Vec<PatternSet>,
    /// (set1 index, set2 index) pairs, 1-based; present for step 16 with both sets.
    duality: Option<Vec<(usize, usize)>>,
}

pub fn patterns_gen(args: &GenArgs) -> Result<()> {
    prepare_out(&args.output)?;
    let mut sets = Vec::new();
    for s in schedules(&args.schedule)? {
        let name = set_name(s.polarity);
        let thresholds = derived_thresholds(&s);
        let mut patterns = Vec::new();
        for (i, (&p, &t)) in s.entries.iter().zip(&thresholds).enumerate() {
            let pair = synthesize_pattern_pair(p, args.canvas)?;
            let stem = format!("{name}_p{:02}", i + 1);
            let (mut image, mut marked) = (None, None);
            if args.output.format == Format::Pgm {
                let path = args.output.out.join(format!("{stem}.pgm"));
                save_gray(&pair.image, &path)?;
                image = Some(path_string(&path));
            }
            if args.output.format != Format::Json {
                let path = args.output.out.join(format!("{stem}_marked.ppm"));
                save_color(&pair.marked.overlay(&pair.image)?, &path)?;
                marked = Some(path_string(&path));
            }
            patterns.push(PatternEntry {
                index: i + 1,
                bg: p.bg(),
                fg: p.fg(),
                threshold: t,
                image,
                marked,
            });
        }
        sets.push(PatternSet { set: name, patterns });
    }
    let duality = (args.schedule.delta_l == 16 && args.schedule.set == SetChoice::Both)
        .then(|| (1..=14).map(|i| (i, dual_index(i).expect("1..=14"))).collect());
    write_report(
        &args.output.out,
        &GenReport {
            command: "patterns gen",
            delta_l: args.schedule.delta_l,
            canvas: args.canvas,
            sets,
            duality,
        },
    )
}

#[derive(Serialize)]
struct MapEntry {
    set: &'static str,
    index: usize,
    bg: Option<u8>,
    fg: Option<u8>,
    threshold: Option<u8>,
    contour_pixels: usize,
    map: Option<String>,
    overlay: Option<String>,
}

#[derive(Serialize)]
struct DetectReport {
    command: &'static str,
    image: String,
    width: usize,
    height: usize,
    window: usize,
    delta_l: Option<u32>,
    threads: usize,
    maps: Vec<MapEntry>,
    elapsed_ms: f64,
    theoretical_ops: Option<u64>,
}

pub fn detect(args: &DetectArgs) -> Result<()> {
    let img = load_image(&args.image)?;
    prepare_out(&args.output)?;
    let mut maps = Vec::new();
    let elapsed;
    let mut ops = None;
    if let (Some(a), Some(m)) = (&args.exemplar, &args.exemplar_mask) {
        let a = load_image(a)?;
        let marked = ContourMap::from_gray(&load_image(m)?);
        let start = Instant::now();
        let map = detect_exemplar(&a, &marked, &img, args.window)?;
        elapsed = start.elapsed();
        let (map_path, overlay) = save_map(&args.output, "exemplar", &map, &img)?;
        maps.push(MapEntry {
            set: "exemplar",
            index: 1,
            bg: None,
            fg: None,
            threshold: None,
            contour_pixels: map.count(),
            map: map_path,
            overlay,
        });
    } else {
        let schedules = schedules(&args.schedule)?;
        let start = Instant::now();
        let stacks = schedules
            .iter()
            .map(|s| detect_stack(&img, s, args.window))
            .collect::<contour_core::Result<Vec<_>>>()?;
        elapsed = start.elapsed();
        let patterns: usize = schedules.iter().map(PatternSchedule::len).sum();
        ops = Some(operation_count(
            img.height() as u64,
            img.width() as u64,
            REFERENCES,
            args.window as u64,
            patterns as u64,
        )?);
        for (s, stack) in schedules.iter().zip(&stacks) {
            for (i, (p, map)) in s.entries.iter().zip(stack).enumerate() {
                let stem = format!("{}_p{:02}", set_name(s.polarity), i + 1);
                let (map_path, overlay) = save_map(&args.output, &stem, map, &img)?;
                maps.push(MapEntry {
                    set: set_name(s.polarity),
                    index: i + 1,
                    bg: Some(p.bg()),
                    fg: Some(p.fg()),
                    threshold: Some(p.threshold()),
                    contour_pixels: map.count(),
                    map: map_path,
                    overlay,
                });
            }
        }
    }
    write_report(
        &args.output.out,
        &DetectReport {
            command: "detect",
            image: path_string(&args.image),
            width: img.width(),
            height: img.height(),
            window: args.window,
            delta_l: args.exemplar.is_none().then_some(args.schedule.delta_l),
            threads: rayon::current_num_threads(),
            maps,
            elapsed_ms: millis(elapsed),
            theoretical_ops: ops,
        },
    )
}

#[derive(Serialize)]
struct LevelSet {
    set: &'static str,
    patterns: usize,
    /// Pixel count per level, index = level.
    level_counts: Vec<usize>,
    max_level: u32,
    mask_pixels: usize,
    levels: Option<String>,
    render: Option<String>,
    mask: Option<String>,
}

#[derive(Serialize)]
struct LevelsReport {
    command: &'static str,
    image: String,
    width: usize,
    height: usize,
    level_min: u32,
    sets: Vec<LevelSet>,
}

pub fn levels(args: &LevelsArgs) -> Result<()> {
    if args.level_min == 0 {
        bail!("--level-min must be at least 1");
    }
    let img = load_image(&args.image)?;
    prepare_out(&args.output)?;
    let mut sets = Vec::new();
    for s in schedules(&args.schedule)? {
        let name = set_name(s.polarity);
        let lm = level_map(&detect_stack(&img, &s, args.window)?)?;
        let mask = threshold_level(&lm, args.level_min);
        let (mut levels, mut render, mut mask_path) = (None, None, None);
        if args.output.format == Format::Pgm {
            let p = args.output.out.join(format!("{name}_levels.pgm"));
            save_gray(&lm.to_gray(), &p)?;
            levels = Some(path_string(&p));
            let p = args.output.out.join(format!("{name}_level{}.pgm", args.level_min));
            save_gray(&mask.to_gray(), &p)?;
            mask_path = Some(path_string(&p));
        }
        if args.output.format != Format::Json {
            let p = args.output.out.join(format!("{name}_levels.ppm"));
            save_color(&render_levels(&lm, &default_bands())?, &p)?;
            render = Some(path_string(&p));
        }
        let mut level_counts = lm.histogram();
        level_counts.resize(s.len() + 1, 0);
        sets.push(LevelSet {
            set: name,
            patterns: s.len(),
            level_counts,
            max_level: lm.max_level(),
            mask_pixels: mask.count(),
            levels,
            render,
            mask: mask_path,
        });
    }
    write_report(
        &args.output.out,
        &LevelsReport {
            command: "levels",
            image: path_string(&args.image),
            width: img.width(),
            height: img.height(),
            level_min: args.level_min,
            sets,
        },
    )
}

#[derive(Serialize)]
struct ImageEval {
    image: String,
    gt: String,
    #[serde(flatten)]
    report: EvalReport,
}

#[derive(Serialize)]
struct Skipped {
    image: String,
    reason: String,
}

#[derive(Serialize)]
struct EvalSummary {
    command: &'static str,
    manifest: String,
    pred: &'static str,
    tolerance: f64,
    level_min: u32,
    images: Vec<ImageEval>,
    skipped: Vec<Skipped>,
    /// Pooled counts over all evaluated images; null when nothing was evaluated.
    aggregate: Option<EvalReport>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    image: &'a str,
    gt: &'a str,
    precision: f64,
    recall: f64,
    f_measure: f64,
    tp: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
}

impl<'a> CsvRow<'a> {
    fn new(image: &'a str, gt: &'a str, r: &EvalReport) -> Self {
        Self {
            image,
            gt,
            precision: r.precision,
            recall: r.recall,
            f_measure: r.f_measure,
            tp: r.tp,
            fp: r.fp,
            fn_: r.fn_,
        }
    }
}

fn predict(args: &EvalArgs, s: &PatternSchedule, path: &Path) -> Result<ContourMap> {
    let img = load_image(path)?;
    Ok(match args.pred {
        PredSource::Mask => ContourMap::from_gray(&img),
        PredSource::Detect => threshold_level(&level_map(&detect_stack(&img, s, args.window)?)?, args.level_min),
    })
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    if args.schedule.set == SetChoice::Both {
        bail!("eval scores one pattern set at a time; pass --set 1 or --set 2");
    }
    if args.level_min == 0 {
        bail!("--level-min must be at least 1");
    }
    if args.tol.is_nan() || args.tol < 0.0 {
        bail!("--tol must be non-negative");
    }
    let s = schedules(&args.schedule)?.remove(0);
    let entries = manifest::load(&args.manifest)?;
    prepare_out(&args.output)?;
    let mut images = Vec::new();
    let mut skipped = Vec::new();
    for e in &entries {
        let image = path_string(&e.image);
        let gt_path = match &e.gt {
            Some(g) if g.exists() => g,
            Some(g) => {
                eprintln!("warning: ground truth {} not found, skipping {image}", g.display());
                skipped.push(Skipped {
                    image,
                    reason: format!("ground truth {} not found", g.display()),
                });
                continue;
            }
            None => {
                eprintln!("warning: no ground truth for {image}, skipping");
                skipped.push(Skipped {
                    image,
                    reason: "no ground truth".into(),
                });
                continue;
            }
        };
        let gt = ContourMap::from_gray(&load_image(gt_path)?);
        let pred = predict(args, &s, &e.image)?;
        if !pred.same_dims(&gt) {
            bail!(
                "{}: image is {}x{} but ground truth is {}x{}",
                image,
                pred.width(),
                pred.height(),
                gt.width(),
                gt.height()
            );
        }
        images.push(ImageEval {
            image,
            gt: path_string(gt_path),
            report: precision_recall_f(&pred, &gt, args.tol)?,
        });
    }
    let aggregate = (!images.is_empty())
        .then(|| EvalReport::aggregate(&images.iter().map(|i| i.report).collect::<Vec<_>>(), args.tol));

    let csv_path = args.output.out.join("report.csv");
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    for i in &images {
        w.serialize(CsvRow::new(&i.image, &i.gt, &i.report))?;
    }
    if let Some(a) = &aggregate {
        w.serialize(CsvRow::new("ALL", "", a))?;
    }
    w.flush()?;

    write_report(
        &args.output.out,
        &EvalSummary {
            command: "eval",
            manifest: path_string(&args.manifest),
            pred: match args.pred {
                PredSource::Detect => "detect",
                PredSource::Mask => "mask",
            },
            tolerance: args.tol,
            level_min: args.level_min,
            images,
            skipped,
            aggregate,
        },
    )
}

#[derive(Serialize)]
struct PatternTiming {
    set: &'static str,
    index: usize,
    median_ms: f64,
}

#[derive(Serialize)]
struct BenchReport {
    command: &'static str,
    image: String,
    width: usize,
    height: usize,
    repetitions: usize,
    patterns: usize,
    threads: usize,
    per_pattern: Vec<PatternTiming>,
    stack_single_ms: f64,
    stack_parallel_ms: f64,
    identical_output: bool,
    theoretical_ops: u64,
    ops_per_sec: f64,
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let (img, name) = match &args.image {
        Some(p) => (load_image(p)?, path_string(p)),
        None => (synth::polygon_scene(481, 321, 1), "synthetic:481x321".to_string()),
    };
    prepare_out(&args.output)?;
    let schedules = schedules(&args.schedule)?;
    let patterns: usize = schedules.iter().map(PatternSchedule::len).sum();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let run_all = || -> Result<Vec<Vec<ContourMap>>> {
        Ok(schedules
            .iter()
            .map(|s| detect_stack(&img, s, 3))
            .collect::<contour_core::Result<_>>()?)
    };

    let mut per_pattern = Vec::new();
    for s in &schedules {
        for (i, &p) in s.entries.iter().enumerate() {
            let one = PatternSchedule {
                entries: vec![p],
                ..s.clone()
            };
            // Touch the references once so the timing covers matching only.
            reference_neighborhoods(p, 3)?;
            let times = (0..args.repetitions)
                .map(|_| {
                    let t = Instant::now();
                    single.install(|| detect_stack(&img, &one, 3))?;
                    Ok(t.elapsed())
                })
                .collect::<Result<Vec<_>>>()?;
            per_pattern.push(PatternTiming {
                set: set_name(s.polarity),
                index: i + 1,
                median_ms: millis(median(times)),
            });
        }
    }

    let reference = single.install(run_all)?;
    let (mut ts, mut tp) = (Vec::new(), Vec::new());
    let mut identical = true;
    for _ in 0..args.repetitions {
        let t = Instant::now();
        single.install(run_all)?;
        ts.push(t.elapsed());
        let t = Instant::now();
        identical &= run_all()? == reference;
        tp.push(t.elapsed());
    }
    let (ms, mp) = (median(ts), median(tp));
    let ops = operation_count(img.height() as u64, img.width() as u64, REFERENCES, 3, patterns as u64)?;
    write_report(
        &args.output.out,
        &BenchReport {
            command: "bench",
            image: name,
            width: img.width(),
            height: img.height(),
            repetitions: args.repetitions,
            patterns,
            threads: rayon::current_num_threads(),
            per_pattern,
            stack_single_ms: millis(ms),
            stack_parallel_ms: millis(mp),
            identical_output: identical,
            theoretical_ops: ops,
            ops_per_sec: ops as f64 / ms.as_secs_f64().max(1e-9),
        },
    )
}

#[derive(Serialize)]
struct SweepRow {
    set: &'static str,
    bg: u8,
    fg: u8,
    ib_b: u8,
    if_b: u8,
    predicate: bool,
    detected_layouts: usize,
    layouts: usize,
    tied: bool,
    agrees: bool,
}

#[derive(Serialize)]
struct SweepSummary {
    command: &'static str,
    points: usize,
    tied: usize,
    disagreements_untied: usize,
    csv: Option<String>,
}

pub fn theory_sweep(args: &SweepArgs) -> Result<()> {
    if args.step == 0 {
        bail!("--step must be positive");
    }
    let grid: Vec<u8> = (args.offset..=255).step_by(args.step as usize).collect();
    let mut rows = Vec::new();
    for s in schedules(&args.schedule)? {
        for p in agreement_sweep(&s.entries, &grid)? {
            rows.push(SweepRow {
                set: set_name(s.polarity),
                bg: p.pattern.bg(),
                fg: p.pattern.fg(),
                ib_b: p.ib_b,
                if_b: p.if_b,
                predicate: p.predicate,
                detected_layouts: p.detected,
                layouts: SWEEP_LAYOUTS,
                tied: p.tied,
                agrees: p.agrees(),
            });
        }
    }
    let summary = SweepSummary {
        command: "theory sweep",
        points: rows.len(),
        tied: rows.iter().filter(|r| r.tied).count(),
        disagreements_untied: rows.iter().filter(|r| !r.tied && !r.agrees).count(),
        csv: args.out.as_deref().map(path_string),
    };
    match &args.out {
        Some(path) => {
            write_csv(csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?, &rows)?;
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).map_or(PathBuf::from("."), Path::to_path_buf);
            write_report(&dir, &summary)
        }
        None => {
            write_csv(csv::Writer::from_writer(std::io::stdout()), &rows)?;
            eprintln!("{}", serde_json::to_string(&summary)?);
            Ok(())
        }
    }
}

fn write_csv<W: std::io::Write>(mut w: csv::Writer<W>, rows: &[SweepRow]) -> Result<()> {
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
