//! Subcommands behind the `graphscene` binary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use graphscene_core::persist::{
    document_to_scenario, graphs_to_graphml, ingest_map, list_catalog, load_all_bundles, load_bundle, read_document,
    scenario_to_document, write_atomic, AssetCatalog, IngestParams,
};
use graphscene_core::realize::{realize_scenario, timeline_to_jsonl, DEFAULT_DT};
use graphscene_core::scenario::{sample_batch, SamplerConfig, Scenario};

pub const CACHE_ENV: &str = "GRAPHSCENE_CACHE";
pub const CATALOG_ENV: &str = "GRAPHSCENE_CATALOG";

#[derive(Debug, Parser)]
#[command(name = "graphscene", version, about = "Lane graphs, regions and scenarios from OpenDRIVE maps")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Directory holding ingested maps and saved scenarios.
    #[arg(long, global = true, env = CACHE_ENV, default_value = "graphscene-cache")]
    pub cache_root: PathBuf,
    /// Asset catalog to use instead of the bundled one.
    #[arg(long, global = true, env = CATALOG_ENV)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse OpenDRIVE files and cache their graphs and regions.
    Ingest {
        #[arg(required = true)]
        sources: Vec<PathBuf>,
        /// Node spacing along lanes, in metres.
        #[arg(long, default_value_t = IngestParams::default().spacing)]
        spacing: f64,
        /// Target region length, in metres.
        #[arg(long, default_value_t = IngestParams::default().target_length)]
        target_length: f64,
    },
    /// List cached maps and their metadata.
    Catalog {
        /// Print the entries as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Sample scenarios from the cached maps.
    Generate {
        /// Sampler seed; 0 unless set here or in `--config`.
        #[arg(long)]
        seed: Option<u64>,
        /// Fraction of the maximum actor count to fill, in [0, 1].
        #[arg(long)]
        fill: Option<f64>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Output directory, created if missing.
        #[arg(long, default_value = "scenarios")]
        out: PathBuf,
        /// JSON sampler configuration; `--seed` and `--fill` override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Restrict sampling to these map ids.
        #[arg(long = "map")]
        maps: Vec<String>,
    },
    /// Compute the kinematic timeline of a scenario document.
    Realize {
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        /// Output file; defaults to the scenario path with a `.timeline.jsonl` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the scenario graphs without actors or goal edges as GraphML.
    ExportEmpty {
        scenario: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn catalog(global: &Global) -> Result<AssetCatalog> {
    match &global.catalog {
        Some(path) => Ok(AssetCatalog::load(path)?),
        None => Ok(AssetCatalog::builtin()),
    }
}

/// Reads a scenario document and rebuilds it against the cached map.
pub fn load_scenario(global: &Global, path: &Path, catalog: &AssetCatalog) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = read_document(&text).with_context(|| format!("parsing {}", path.display()))?;
    let bundle = load_bundle(&global.cache_root, &doc.map_id)
        .with_context(|| format!("map {} is not in the cache; run ingest first", doc.map_id))?;
    Ok(document_to_scenario(&text, &bundle, catalog).with_context(|| format!("loading {}", path.display()))?)
}

fn default_timeline_path(scenario: &Path) -> PathBuf {
    let stem = scenario.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    scenario.with_file_name(format!("{stem}.timeline.jsonl"))
}

pub fn run(cli: Cli) -> Result<()> {
    let global = &cli.global;
    match cli.command {
        Command::Ingest {
            sources,
            spacing,
            target_length,
        } => {
            let params = IngestParams { spacing, target_length };
            for source in &sources {
                let outcome = ingest_map(source, &global.cache_root, params)
                    .with_context(|| format!("ingesting {}", source.display()))?;
                let m = &outcome.entry.metadata;
                println!(
                    "{}\t{}\t{} junctions, {} crosswalks, {} traffic lights",
                    outcome.entry.map_id,
                    if outcome.rebuilt { "built" } else { "cached" },
                    m.junction_count,
                    m.crosswalk_count,
                    m.traffic_light_count,
                );
            }
        }
        Command::Catalog { json } => {
            let entries = list_catalog(&global.cache_root)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&entries)?);
            } else if entries.is_empty() {
                println!("no maps cached in {}", global.cache_root.display());
            } else {
                println!("map\tjunctions\tcrosswalks\ttraffic_lights\tdrivable_m");
                for e in entries {
                    let m = &e.metadata;
                    println!(
                        "{}\t{}\t{}\t{}\t{:.1}",
                        e.map_id, m.junction_count, m.crosswalk_count, m.traffic_light_count, m.total_drivable_length
                    );
                }
            }
        }
        Command::Generate {
            seed,
            fill,
            count,
            out,
            config,
            maps,
        } => {
            let catalog = catalog(global)?;
            let mut cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<SamplerConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => SamplerConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(fill) = fill {
                cfg.fill_percentage = fill;
            }
            let mut bundles = load_all_bundles(&global.cache_root)?;
            if !maps.is_empty() {
                bundles.retain(|b| maps.contains(&b.map_id));
                if let Some(missing) = maps.iter().find(|m| !bundles.iter().any(|b| &&b.map_id == m)) {
                    bail!("map {missing} is not in the cache");
                }
            }
            if bundles.is_empty() {
                bail!("no maps cached in {}; run ingest first", global.cache_root.display());
            }
            let batch = sample_batch(&bundles, &catalog, &cfg, count)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for s in &batch {
                let path = out.join(format!("{}.json", s.scenario_id));
                write_atomic(&path, scenario_to_document(s).as_bytes())?;
                println!("{}\t{}\t{} actors", path.display(), s.map_id, s.actors.len());
            }
        }
        Command::Realize { scenario, dt, out } => {
            let catalog = catalog(global)?;
            let s = load_scenario(global, &scenario, &catalog)?;
            let timeline = realize_scenario(&s, dt)?;
            let out = out.unwrap_or_else(|| default_timeline_path(&scenario));
            write_atomic(&out, timeline_to_jsonl(&timeline).as_bytes())?;
            println!(
                "{}\t{} frames\t{:.3} s\t{} actors",
                out.display(),
                timeline.frames.len(),
                timeline.duration,
                timeline.actors.len()
            );
        }
        Command::ExportEmpty { scenario, out } => {
            let catalog = catalog(global)?;
            let s = load_scenario(global, &scenario, &catalog)?;
            let xml = graphs_to_graphml(&[&s.road_graph.stripped(), &s.pedestrian_graph.stripped()]);
            match out {
                Some(path) => write_atomic(&path, xml.as_bytes())?,
                None => print!("{xml}"),
            }
        }
        Command::Serve { port, host } => {
            let catalog = catalog(global)?;
            let state = graphscene_service::AppState::open(&global.cache_root, catalog)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .with_context(|| format!("binding {host}:{port}"))?;
                log::info!("listening on {}", listener.local_addr()?);
                eprintln!("serving {} on http://{}", global.cache_root.display(), listener.local_addr()?);
                graphscene_service::serve(listener, state).await?;
                Ok::<_, anyhow::Error>(())
            })?;
        }
    }
    Ok(())
}
