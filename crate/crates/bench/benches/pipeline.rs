use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use graphscene_bench::{bundle, fixture_text};
use graphscene_core::lanegraph::{build_lane_graph, build_pedestrian_graph};
use graphscene_core::opendrive::parse_opendrive;
use graphscene_core::persist::{graph_to_graphml, scenario_to_document, AssetCatalog};
use graphscene_core::realize::realize_scenario;
use graphscene_core::regions::segment_regions;
use graphscene_core::scenario::{sample_scenario, SamplerConfig};

const MAPS: [&str; 2] = ["fixture_straight", "fixture_tjunction"];

fn parse(c: &mut Criterion) {
    let mut group = c.benchmark_group("parse");
    for name in MAPS {
        let xml = fixture_text(name);
        group.bench_with_input(BenchmarkId::from_parameter(name), &xml, |b, xml| {
            b.iter(|| parse_opendrive(black_box(xml)).unwrap())
        });
    }
    group.finish();
}

fn graphs(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_build");
    for name in MAPS {
        let net = parse_opendrive(&fixture_text(name)).unwrap();
        for spacing in [1.0, 5.0] {
            group.bench_function(BenchmarkId::new(name, spacing), |b| {
                b.iter(|| {
                    let road = build_lane_graph(&net, name, black_box(spacing)).unwrap();
                    let ped = build_pedestrian_graph(&net, name, spacing).unwrap();
                    (road, ped)
                })
            });
        }
    }
    group.finish();
}

fn regions(c: &mut Criterion) {
    let mut group = c.benchmark_group("segmentation");
    for name in MAPS {
        let net = parse_opendrive(&fixture_text(name)).unwrap();
        let road = build_lane_graph(&net, name, 1.0).unwrap();
        let ped = build_pedestrian_graph(&net, name, 1.0).unwrap();
        group.bench_function(name, |b| {
            b.iter(|| segment_regions(&road, Some(&ped), &net, black_box(30.0)).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let catalog = AssetCatalog::builtin();
    let maps: Vec<_> = MAPS.iter().map(|n| bundle(n, 2.0, 30.0)).collect();
    let mut seed = 0;
    c.bench_function("sample_scenario", |b| {
        b.iter(|| {
            seed += 1;
            let cfg = SamplerConfig { seed, fill_percentage: 0.5, ..Default::default() };
            sample_scenario(&maps, &catalog, &cfg).unwrap()
        })
    });
    let cfg = SamplerConfig { seed: 1, fill_percentage: 0.5, ..Default::default() };
    let s = sample_scenario(&maps, &catalog, &cfg).unwrap();
    c.bench_function("scenario_document", |b| b.iter(|| scenario_to_document(black_box(&s))));
    c.bench_function("graph_to_graphml", |b| b.iter(|| graph_to_graphml(black_box(&s.road_graph))));
}

fn realize(c: &mut Criterion) {
    let catalog = AssetCatalog::builtin();
    let maps = [bundle("fixture_tjunction", 2.0, 200.0)];
    let cfg = SamplerConfig { seed: 3, fill_percentage: 1.0, ..Default::default() };
    let s = sample_scenario(&maps, &catalog, &cfg).unwrap();
    let mut group = c.benchmark_group("realize");
    for dt in [0.05, 0.01] {
        group.bench_function(BenchmarkId::from_parameter(dt), |b| b.iter(|| realize_scenario(&s, black_box(dt)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, parse, graphs, regions, sampling, realize);
criterion_main!(benches);
