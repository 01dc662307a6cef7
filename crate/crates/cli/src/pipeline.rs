use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use foodscape::bn::export::{category_names, dag_dot, dag_json, format_edges};
use foodscape::bn::{build_count_table, hill_climb_with, CountTable, Dag, HillClimbOptions};
use foodscape::data::{load_dataset, Dataset, FoodCategory, TimeSlot};
use foodscape::gazetteer::Gazetteer;
use foodscape::geo::{make_frame, LocalFrame, PlanarPoint};
use foodscape::kde::export::{hotspots_geojson, raster_metadata_json, to_esri_ascii};
use foodscape::kde::{
    extract_hotspots, jitter_duplicates, rasterize_with, select_bandwidth_with, Bandwidth,
    KdeError, DUPLICATE_JITTER_M,
};
use foodscape::synth::{generate, SynthSpec};
use foodscape::Execution;

use crate::config::{
    BandwidthConfig, BnConfig, Command, InitGraph, InputArgs, InputConfig, KdeConfig, RunConfig,
};
use crate::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(args) => {
            let (dataset, input) = load_input(&args.input)?;
            let out = &args.common.out;
            write_config(
                out,
                &run_config(
                    "ingest",
                    input,
                    &dataset,
                    None,
                    None,
                    args.common.execution(),
                ),
            )?;
            ingest(&dataset, out)
        }
        Command::Kde(args) => {
            let kde = args.kde.to_config()?;
            let (dataset, input) = load_input(&args.input)?;
            let out = &args.common.out;
            let exec = args.common.execution();
            write_config(
                out,
                &run_config("kde", input, &dataset, Some(kde.clone()), None, exec),
            )?;
            run_kde(&dataset, &kde, exec, out)
        }
        Command::Bn(args) => {
            let bn = BnConfig {
                slots: args.bn.slot.slots(),
                init: args.bn.bn_init,
                max_iters: args.bn.max_iters,
            };
            let (dataset, input) = load_input(&args.input)?;
            let out = &args.common.out;
            let exec = args.common.execution();
            write_config(
                out,
                &run_config("bn", input, &dataset, None, Some(bn.clone()), exec),
            )?;
            run_bn(&dataset, &bn, exec, out)
        }
        Command::Synth(args) => {
            let text =
                std::fs::read_to_string(&args.spec).map_err(|e| CliError::io(&args.spec, e))?;
            let spec = SynthSpec::from_json(&text)?;
            let output = generate(&spec)?;
            output.write_to_dir(&args.out)?;
            let mut echo = serde_json::to_string_pretty(&spec).expect("spec serializes");
            echo.push('\n');
            write_file(&args.out, "config.json", &echo)?;
            println!(
                "{} posts from {} businesses over {} days",
                output.manifest.total_posts, output.manifest.businesses_with_posts, spec.n_days
            );
            Ok(())
        }
        Command::Report(args) => {
            let kde = args.kde.to_config()?;
            let bn = BnConfig {
                slots: kde.slots.clone(),
                init: args.bn_init,
                max_iters: args.max_iters,
            };
            let (dataset, input) = load_input(&args.input)?;
            let out = &args.common.out;
            let exec = args.common.execution();
            write_config(
                out,
                &run_config(
                    "report",
                    input,
                    &dataset,
                    Some(kde.clone()),
                    Some(bn.clone()),
                    exec,
                ),
            )?;
            ingest(&dataset, out)?;
            run_kde(&dataset, &kde, exec, out)?;
            run_bn(&dataset, &bn, exec, out)
        }
    }
}

fn run_config(
    command: &'static str,
    input: InputConfig,
    dataset: &Dataset,
    kde: Option<KdeConfig>,
    bn: Option<BnConfig>,
    execution: Execution,
) -> RunConfig {
    RunConfig {
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        input,
        reference_date: dataset.reference_date,
        window_days: dataset.window_days,
        kde,
        bn,
        execution,
    }
}

fn load_input(args: &InputArgs) -> Result<(Dataset, InputConfig), CliError> {
    let dataset = match (
        &args.dataset,
        &args.posts,
        &args.businesses,
        args.reference_date,
    ) {
        (Some(path), ..) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Dataset::from_json(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        (None, Some(posts), Some(businesses), Some(date)) => load_dataset(posts, businesses, date)?,
        _ => return Err(CliError::Input(
            "either --dataset or all of --posts, --businesses and --reference-date are required"
                .into(),
        )),
    };
    let show = |p: &Option<std::path::PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let input = InputConfig {
        posts: show(&args.posts),
        businesses: show(&args.businesses),
        dataset: show(&args.dataset),
        posts_sha256: dataset.provenance.posts_sha256.clone(),
        businesses_sha256: dataset.provenance.businesses_sha256.clone(),
    };
    Ok((dataset, input))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn write_config(out: &Path, config: &RunConfig) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(config).expect("config serializes");
    text.push('\n');
    write_file(out, "config.json", &text)
}

const ALL_SLOTS: [TimeSlot; 4] = [
    TimeSlot::Breakfast,
    TimeSlot::Lunch,
    TimeSlot::Dinner,
    TimeSlot::Unassigned,
];

fn ingest(dataset: &Dataset, out: &Path) -> Result<(), CliError> {
    let counts = dataset.counts_by_slot();
    let mut tsv = String::from("slot");
    for c in FoodCategory::ALL {
        write!(tsv, "\t{}", c.key()).unwrap();
    }
    tsv.push_str("\ttotal\n");
    let mut by_slot = BTreeMap::new();
    for (i, slot) in ALL_SLOTS.into_iter().enumerate() {
        let row = counts[i];
        tsv.push_str(slot.key());
        for n in row {
            write!(tsv, "\t{n}").unwrap();
        }
        writeln!(tsv, "\t{}", row.iter().sum::<usize>()).unwrap();
        let cats: BTreeMap<&str, usize> = FoodCategory::ALL
            .iter()
            .map(|c| (c.key(), row[c.index()]))
            .collect();
        by_slot.insert(slot.key(), cats);
    }
    let summary = json!({
        "reference_date": dataset.reference_date,
        "window_start": dataset.window_start(),
        "window_days": dataset.window_days,
        "businesses": dataset.businesses.len(),
        "posts": dataset.posts.len(),
        "posts_location_inherited": dataset.posts.iter().filter(|p| p.location_inherited).count(),
        "posts_by_slot": by_slot,
        "provenance": dataset.provenance,
    });
    let mut summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    summary_text.push('\n');

    write_file(out, "dataset.json", &dataset.to_json())?;
    write_file(out, "ingest.json", &summary_text)?;
    write_file(out, "ingest.tsv", &tsv)?;
    println!(
        "{} posts from {} businesses, {} to {}",
        dataset.posts.len(),
        dataset.businesses.len(),
        dataset.window_start(),
        dataset.reference_date
    );
    print!("{tsv}");
    Ok(())
}

struct SummaryRow {
    slot: TimeSlot,
    category: Option<FoodCategory>,
    bandwidth: Option<f64>,
    hotspots: String,
}

fn run_kde(
    dataset: &Dataset,
    cfg: &KdeConfig,
    exec: Execution,
    out: &Path,
) -> Result<(), CliError> {
    let coords: Vec<(f64, f64)> = dataset
        .posts
        .iter()
        .map(|p| (p.latitude, p.longitude))
        .collect();
    if coords.is_empty() {
        return Err(CliError::Infeasible(
            "no posts in the analysis window".into(),
        ));
    }
    let frame = make_frame(&coords)?;
    let gazetteer = match &cfg.gazetteer {
        Some(path) => Gazetteer::from_csv(Path::new(path))
            .map_err(|e| CliError::Input(format!("{path}: {e}")))?,
        None => Gazetteer::manhattan(),
    };
    let candidates = cfg.bandwidth.candidates()?;

    let mut units = Vec::new();
    for &slot in &cfg.slots {
        if cfg.per_category {
            let cats = if cfg.categories.is_empty() {
                FoodCategory::ALL.to_vec()
            } else {
                cfg.categories.clone()
            };
            units.extend(cats.into_iter().map(|c| (slot, Some(c))));
        } else {
            units.push((slot, None));
        }
    }

    let mut rows = Vec::new();
    for (slot, category) in units {
        let context = match category {
            Some(c) => format!("{slot}/{c}"),
            None => slot.to_string(),
        };
        let posts: Vec<_> = dataset
            .posts
            .iter()
            .filter(|p| p.slot == slot)
            .filter(|p| match category {
                Some(c) => p.category == c,
                None => cfg.categories.is_empty() || cfg.categories.contains(&p.category),
            })
            .collect();
        let mut points = Vec::with_capacity(posts.len());
        for p in &posts {
            points.push(frame.project(p.latitude, p.longitude)?);
        }
        let ids: Vec<&str> = posts.iter().map(|p| p.id.as_str()).collect();
        let points = jitter_duplicates(&points, &ids, DUPLICATE_JITTER_M, cfg.seed);

        match kde_unit(
            &points,
            slot,
            category,
            cfg,
            candidates.as_deref(),
            &frame,
            &gazetteer,
            exec,
            out,
        ) {
            Ok(row) => rows.push(row),
            Err(KdeOutcome::Kde(err)) => {
                let infeasible = matches!(
                    err,
                    KdeError::EmptySample
                        | KdeError::TooFewPoints { .. }
                        | KdeError::DegenerateSample
                );
                if cfg.per_category && infeasible {
                    eprintln!("skipping {context}: {err}");
                    rows.push(SummaryRow {
                        slot,
                        category,
                        bandwidth: None,
                        hotspots: format!("insufficient data ({} posts)", points.len()),
                    });
                } else {
                    return Err(CliError::kde(err, &context));
                }
            }
            Err(KdeOutcome::Cli(err)) => return Err(err),
        }
    }

    let mut tsv = String::from(if cfg.per_category {
        "slot\tcategory\tbandwidth_m\thotspots\n"
    } else {
        "slot\tbandwidth_m\thotspots\n"
    });
    for row in &rows {
        tsv.push_str(row.slot.key());
        if cfg.per_category {
            write!(tsv, "\t{}", row.category.map_or("all", |c| c.key())).unwrap();
        }
        match row.bandwidth {
            Some(h) => write!(tsv, "\t{h:.0}").unwrap(),
            None => tsv.push_str("\tNA"),
        }
        writeln!(tsv, "\t{}", row.hotspots).unwrap();
    }
    write_file(out, "summary.tsv", &tsv)?;
    print!("{tsv}");
    Ok(())
}

enum KdeOutcome {
    Kde(KdeError),
    Cli(CliError),
}

impl From<KdeError> for KdeOutcome {
    fn from(e: KdeError) -> Self {
        KdeOutcome::Kde(e)
    }
}

impl From<CliError> for KdeOutcome {
    fn from(e: CliError) -> Self {
        KdeOutcome::Cli(e)
    }
}

#[allow(clippy::too_many_arguments)]
fn kde_unit(
    points: &[PlanarPoint],
    slot: TimeSlot,
    category: Option<FoodCategory>,
    cfg: &KdeConfig,
    candidates: Option<&[Bandwidth]>,
    frame: &LocalFrame,
    gazetteer: &Gazetteer,
    exec: Execution,
    out: &Path,
) -> Result<SummaryRow, KdeOutcome> {
    let stem = match category {
        Some(c) => format!("kde/{}_{}", slot.key(), c.key()),
        None => format!("kde/{}", slot.key()),
    };
    let (h, selection) = match (&cfg.bandwidth, candidates) {
        (BandwidthConfig::Fixed { meters }, _) => {
            if points.is_empty() {
                return Err(KdeError::EmptySample.into());
            }
            let h = Bandwidth::new(*meters)?;
            (
                h,
                json!({ "mode": "fixed", "n_points": points.len(), "chosen_m": h.meters() }),
            )
        }
        (_, Some(grid)) => {
            let sel = select_bandwidth_with(points, grid, exec)?;
            if sel.clamped {
                eprintln!(
                    "warning: {slot}: selected bandwidth {} m is at the edge of the grid",
                    sel.chosen.meters()
                );
            }
            let doc = json!({
                "mode": "cross_validated",
                "n_points": points.len(),
                "chosen_m": sel.chosen.meters(),
                "chosen_index": sel.chosen_index,
                "clamped": sel.clamped,
                "candidates_m": sel.candidates.iter().map(|b| b.meters()).collect::<Vec<_>>(),
                "scores": sel.scores,
            });
            (sel.chosen, doc)
        }
        (BandwidthConfig::CrossValidated { .. }, None) => {
            unreachable!("grid validated with the config")
        }
    };
    let mut selection: Value = selection;
    selection["slot"] = json!(slot.key());
    selection["category"] = json!(category.map_or("all", |c| c.key()));

    let cell = cfg.cell_size_m.unwrap_or(h.meters() / 4.0);
    let field = rasterize_with(points, h, *frame, cell, exec)?.with_labels(Some(slot), category);
    let spots = extract_hotspots(&field, cfg.hotspot_quantile)?;
    let names: Vec<String> = spots
        .iter()
        .map(|s| gazetteer.label(s.latitude, s.longitude))
        .collect();

    let mut selection_text =
        serde_json::to_string_pretty(&selection).expect("selection serializes");
    selection_text.push('\n');
    write_file(out, &format!("{stem}.bandwidth.json"), &selection_text)?;
    write_file(out, &format!("{stem}.asc"), &to_esri_ascii(&field))?;
    write_file(
        out,
        &format!("{stem}.asc.json"),
        &raster_metadata_json(&field),
    )?;
    write_file(
        out,
        &format!("{stem}.hotspots.geojson"),
        &hotspots_geojson(&spots, Some(slot), category, Some(&names)),
    )?;

    let listed: Vec<&str> = names
        .iter()
        .take(cfg.top_hotspots)
        .map(String::as_str)
        .collect();
    Ok(SummaryRow {
        slot,
        category,
        bandwidth: Some(h.meters()),
        hotspots: if listed.is_empty() {
            "none".into()
        } else {
            listed.join("; ")
        },
    })
}

fn counts_tsv(table: &CountTable) -> String {
    let mut s = String::from("date");
    for c in FoodCategory::ALL {
        write!(s, "\t{}", c.key()).unwrap();
    }
    s.push('\n');
    for (date, row) in table.dates.iter().zip(&table.counts) {
        write!(s, "{date}").unwrap();
        for n in row {
            write!(s, "\t{n}").unwrap();
        }
        s.push('\n');
    }
    s
}

fn run_bn(dataset: &Dataset, cfg: &BnConfig, exec: Execution, out: &Path) -> Result<(), CliError> {
    let names = category_names();
    let mut summary = String::from("slot\tscore\tedges\n");
    for &slot in &cfg.slots {
        let table = build_count_table(dataset, slot).map_err(|e| CliError::bn(e, slot))?;
        let data = table.to_matrix();
        let init = match cfg.init {
            InitGraph::Empty => Dag::empty(FoodCategory::COUNT),
            InitGraph::Full => Dag::full(FoodCategory::COUNT),
        };
        let options = HillClimbOptions {
            max_iters: cfg.max_iters,
            exec,
        };
        let (dag, trace) =
            hill_climb_with(&data, &init, options).map_err(|e| CliError::bn(e, slot))?;
        if !trace.converged {
            eprintln!(
                "warning: {slot}: search stopped after {} moves without converging",
                cfg.max_iters
            );
        }
        write_file(
            out,
            &format!("bn/{}.json", slot.key()),
            &dag_json(Some(slot), &names, &trace),
        )?;
        write_file(
            out,
            &format!("bn/{}.dot", slot.key()),
            &dag_dot(Some(slot), &names, &dag),
        )?;
        write_file(
            out,
            &format!("bn/{}.counts.tsv", slot.key()),
            &counts_tsv(&table),
        )?;
        let edges = format_edges(&dag, &names);
        let shown = if edges.is_empty() {
            "none".to_string()
        } else {
            edges.join(", ")
        };
        writeln!(
            summary,
            "{}\t{:.4}\t{shown}",
            slot.key(),
            trace.final_score.total_bic
        )
        .unwrap();
    }
    write_file(out, "bn/summary.tsv", &summary)?;
    print!("{summary}");
    Ok(())
}
