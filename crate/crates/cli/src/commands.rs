use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use stackguide::eval::{
    compute_metrics, results_to_text, sha256_file, EvalReport, FrameResult, Method, TrajectoryEntry,
};
use stackguide::geo::{load_stack, GeoStack, StackEntry, StackManifest, TargetEntry};
use stackguide::net::{read_weights, train_with_progress, write_weights, Example, ModelWeights};
use stackguide::pipeline::{evaluate_baseline, evaluate_learned, par_map, write_overlays, BaselineSettings, View};
use stackguide::raster::write_pgm8;
use stackguide::rng::{domain, stream_key};
use stackguide::scene::{Appearance, Scene};
use stackguide::trajectory::{judge_trajectory, simulate_trajectory, Trajectory};
use stackguide::view_synth::{
    generate_dataset, render_view, stack_fingerprint, DatasetManifest, SourceRestriction, Split,
};

use crate::config::RunConfig;
use crate::{Cli, CliError, Command, Recipe};

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::load(cli.config.as_deref())?.resolve(cli.seed, cli.threads);
    let out = cli.out;
    match cli.command {
        Command::Synth { recipe } => synth(cfg, &out, recipe),
        Command::Ingest { stack } => ingest(&stack),
        Command::Generate {
            stack,
            train,
            test,
            train_images,
            test_images,
        } => {
            let mut cfg = cfg;
            cfg.dataset.train = train.unwrap_or(cfg.dataset.train);
            cfg.dataset.test = test.unwrap_or(cfg.dataset.test);
            cfg.dataset.train_images = train_images.or(cfg.dataset.train_images);
            cfg.dataset.test_images = test_images.or(cfg.dataset.test_images);
            generate(cfg, &out, &stack)
        }
        Command::Train { data, steps } => {
            let mut cfg = cfg;
            cfg.train.adaptive.steps = steps.unwrap_or(cfg.train.adaptive.steps);
            train(cfg, &out, &data)
        }
        Command::Eval {
            data,
            weights,
            stack,
            reference,
            overlays,
        } => {
            let mut cfg = cfg;
            cfg.eval.reference = reference.or(cfg.eval.reference);
            cfg.eval.overlays = overlays.unwrap_or(cfg.eval.overlays);
            eval(cfg, &out, &data, Some(&weights), stack.as_deref())
        }
        Command::Baseline {
            data,
            stack,
            reference,
            no_prior,
        } => {
            let mut cfg = cfg;
            cfg.eval.reference = reference.or(cfg.eval.reference);
            if no_prior {
                cfg.sift.use_prior = false;
            }
            eval(cfg, &out, &data, None, Some(&stack))
        }
        Command::Trajectory {
            stack,
            weights,
            steps,
            reference,
        } => {
            let mut cfg = cfg;
            cfg.train.adaptive.steps = steps.unwrap_or(cfg.train.adaptive.steps);
            cfg.eval.reference = reference.or(cfg.eval.reference);
            trajectory(cfg, &out, &stack, weights.as_deref())
        }
        Command::Report { reports } => report(&reports),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Write(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::Write(format!("{}: {e}", path.display())))
}

/// `provenance.txt`: one `name<TAB>sha256` line per input.
fn write_provenance(dir: &Path, entries: &BTreeMap<String, String>) -> Result<()> {
    let text: String = entries.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect();
    write_file(&dir.join("provenance.txt"), text.as_bytes())
}

fn hash_input(path: &Path) -> Result<String> {
    sha256_file(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn synth(cfg: RunConfig, out: &Path, recipe: Recipe) -> Result<()> {
    let acquisitions: &[(&str, u64, Appearance)] = match recipe {
        Recipe::Weak => &[("A", 1, Appearance::Base)],
        Recipe::Strong => &[
            ("A", 1, Appearance::Base),
            ("A_snow", 2, Appearance::Snow),
            ("B", 3, Appearance::Base),
            ("B_snow", 4, Appearance::Snow),
        ],
    };
    create_dir(out)?;
    let scene = Scene::new(cfg.scene.clone());
    let mut images = Vec::new();
    for &(id, date, app) in acquisitions {
        let img = scene.geo_image(id, date, app);
        write_pgm8(&out.join(format!("{id}.pgm")), &img.pixels)?;
        write_file(&out.join(format!("{id}.pgw")), img.geo.to_world_file().as_bytes())?;
        images.push(StackEntry {
            id: id.to_string(),
            raster: PathBuf::from(format!("{id}.pgm")),
            world_file: PathBuf::from(format!("{id}.pgw")),
            mode: app.tag().to_string(),
            target_pixel: None,
        });
        println!("{id}: {}x{} {} (date {date})", img.width(), img.height(), app.tag());
    }
    let (easting, northing) = scene.target_world();
    let manifest = StackManifest {
        target: TargetEntry { easting, northing },
        radiometry: None,
        images,
    };
    manifest.write(&out.join("stack.toml"))?;
    cfg.write(out)?;
    println!("wrote {}", out.join("stack.toml").display());
    Ok(())
}

fn ingest(path: &Path) -> Result<()> {
    let loaded = load_stack(path)?;
    let stack = &loaded.stack;
    println!("stack {} ({} images)", path.display(), stack.images.len());
    for img in &stack.images {
        let (lo, hi) = img.pixels.min_max();
        let mean = img.pixels.data.iter().map(|&v| v as f64).sum::<f64>() / img.pixels.data.len() as f64;
        let (u, v) = stack.target.pixel_in(&img.image_id)?;
        println!(
            "  {:<12} {:>5}x{:<5} mode {:<8} range [{lo:.3}, {hi:.3}] mean {mean:.3} target ({u:.2}, {v:.2})",
            img.image_id,
            img.width(),
            img.height(),
            if img.mode_tag.is_empty() { "-" } else { &img.mode_tag },
        );
    }
    for id in &loaded.degenerate {
        println!("  warning: {id} has a degenerate radiometric range");
    }
    println!("fingerprint {}", stack_fingerprint(stack));
    Ok(())
}

fn generate(cfg: RunConfig, out: &Path, stack_path: &Path) -> Result<()> {
    let stack = load_stack(stack_path)?.stack;
    cfg.sampler.validate(cfg.net.output_stride)?;
    let restriction = SourceRestriction {
        train: cfg.dataset.train_images.clone(),
        test: cfg.dataset.test_images.clone(),
    };
    let t0 = Instant::now();
    let manifest = generate_dataset(&stack, &cfg.sampler, cfg.dataset.train, cfg.dataset.test, cfg.seed, &restriction)?;
    manifest.check_disjoint()?;
    manifest.emit(&stack, out)?;
    cfg.write(out)?;
    let mut prov = BTreeMap::new();
    prov.insert("stack".to_string(), manifest.stack_fingerprint.clone());
    prov.insert("config".to_string(), cfg.hash());
    write_provenance(out, &prov)?;
    println!(
        "generated {} train + {} test views of {}px in {:.1}s -> {}",
        manifest.r_train,
        manifest.r_test,
        manifest.view_size,
        t0.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}

fn read_dataset(data: &Path) -> Result<(DatasetManifest, String)> {
    let path = data.join("manifest.txt");
    let manifest = DatasetManifest::read(&path)?;
    Ok((manifest, hash_input(&path)?))
}

fn check_view_size(cfg: &RunConfig, view_size: usize) -> Result<()> {
    if view_size != cfg.net.input_size {
        return Err(CliError::Config(format!(
            "dataset views are {view_size}px but the network input is {}px",
            cfg.net.input_size
        )));
    }
    Ok(())
}

/// Train from scratch; progress goes to stderr every 100 steps.
fn fit(cfg: &RunConfig, examples: &[Example], out: &Path) -> Result<ModelWeights<f32>> {
    cfg.net.validate()?;
    let init = ModelWeights::<f32>::init(&cfg.net, cfg.seed)?;
    let t0 = Instant::now();
    let outcome = train_with_progress(init, examples, &cfg.train, |r| {
        if r.step % 100 == 0 {
            eprintln!(
                "step {:>5} {:<9} loss {:.4} ({:.0}s)",
                r.step,
                r.stage.as_str(),
                r.loss,
                t0.elapsed().as_secs_f64()
            );
        }
    })?;
    write_weights(&out.join("weights.bin"), &outcome.weights)?;
    write_file(&out.join("loss_curve.tsv"), outcome.curve.to_text().as_bytes())?;
    if let Some((head, tail)) = outcome.curve.head_tail_means(50) {
        println!(
            "trained {} steps on {} examples in {:.1}s; mean loss {head:.4} (first 50) -> {tail:.4} (last 50)",
            outcome.curve.records.len(),
            examples.len(),
            t0.elapsed().as_secs_f64()
        );
    }
    Ok(outcome.weights)
}

fn train(cfg: RunConfig, out: &Path, data: &Path) -> Result<()> {
    let (manifest, manifest_hash) = read_dataset(data)?;
    check_view_size(&cfg, manifest.view_size)?;
    let examples = load_examples(data, &manifest)?;
    create_dir(out)?;
    cfg.write(out)?;
    fit(&cfg, &examples, out)?;
    let mut prov = BTreeMap::new();
    prov.insert("manifest".to_string(), manifest_hash);
    prov.insert("config".to_string(), cfg.hash());
    prov.insert("weights".to_string(), hash_input(&out.join("weights.bin"))?);
    write_provenance(out, &prov)
}

fn load_examples(data: &Path, manifest: &DatasetManifest) -> Result<Vec<Example>> {
    Ok(stackguide::pipeline::load_examples(data, manifest)?)
}

fn reference_id(cfg: &RunConfig, stack: &GeoStack) -> String {
    cfg.eval.reference.clone().unwrap_or_else(|| stack.images[0].image_id.clone())
}

fn baseline_settings(cfg: &RunConfig) -> BaselineSettings {
    BaselineSettings {
        sift: cfg.sift.clone(),
        prior_noise: cfg.prior_noise.clone(),
        seed: cfg.seed,
    }
}

fn config_json(cfg: &RunConfig) -> Option<serde_json::Value> {
    serde_json::to_value(cfg).ok()
}

/// Learned model (when `weights` is given) and/or baseline (when `stack`
/// is given) on the test split of `data`.
fn eval(cfg: RunConfig, out: &Path, data: &Path, weights: Option<&Path>, stack_path: Option<&Path>) -> Result<()> {
    let (manifest, manifest_hash) = read_dataset(data)?;
    let views = stackguide::pipeline::load_views(data, &manifest, Split::Test)?;
    create_dir(out)?;
    cfg.write(out)?;
    let mut prov = BTreeMap::new();
    prov.insert("manifest".to_string(), manifest_hash);
    prov.insert("config".to_string(), cfg.hash());

    let stack = match stack_path {
        Some(p) => {
            let stack = load_stack(p)?.stack;
            if stack_fingerprint(&stack) != manifest.stack_fingerprint {
                return Err(CliError::Input(format!(
                    "{} is not the stack the dataset in {} was generated from",
                    p.display(),
                    data.display()
                )));
            }
            prov.insert("stack".to_string(), manifest.stack_fingerprint.clone());
            Some(stack)
        }
        None => None,
    };

    let mut results: Vec<FrameResult> = Vec::new();
    let mut reference = None;
    if let Some(stack) = &stack {
        let id = reference_id(&cfg, stack);
        let t0 = Instant::now();
        results.extend(evaluate_baseline(stack, &id, &views, &baseline_settings(&cfg), cfg.threads)?);
        eprintln!("baseline on {} views in {:.1}s", views.len(), t0.elapsed().as_secs_f64());
        reference = Some(id);
    }
    if let Some(wpath) = weights {
        let w = read_weights(wpath)?;
        prov.insert("weights".to_string(), hash_input(wpath)?);
        let outputs = evaluate_learned(&w, &views, cfg.threads)?;
        if cfg.eval.overlays > 0 {
            let dir = out.join("overlays");
            create_dir(&dir)?;
            write_overlays(&dir, &views, &outputs, cfg.eval.overlays, &cfg.eval.overlay_format)?;
        }
        results.extend(outputs.into_iter().map(|o| o.result));
    }

    let title = match &reference {
        Some(id) => format!("{} test views, baseline reference {id}", views.len()),
        None => format!("{} test views", views.len()),
    };
    let mut report = compute_metrics(&results)?;
    report.title = title;
    report.provenance = prov.clone();
    report.config = config_json(&cfg);
    report.write(out, "report")?;
    write_file(&out.join("frames.tsv"), results_to_text(&results).as_bytes())?;
    write_provenance(out, &prov)?;
    print!("{}", report.render_table());

    // Per appearance mode of the source image, when the stack is known.
    if let Some(stack) = &stack {
        let mode_of: BTreeMap<&str, &str> = views
            .iter()
            .map(|v| {
                let mode = stack.image(&v.transform.source_image_id).map_or("", |i| i.mode_tag.as_str());
                (v.id.as_str(), mode)
            })
            .collect();
        let modes: Vec<&str> = {
            let mut m: Vec<&str> = mode_of.values().copied().filter(|m| !m.is_empty()).collect();
            m.sort_unstable();
            m.dedup();
            m
        };
        if modes.len() > 1 {
            for mode in modes {
                let subset: Vec<FrameResult> =
                    results.iter().filter(|r| mode_of.get(r.id.as_str()) == Some(&mode)).cloned().collect();
                let mut sub = compute_metrics(&subset)?;
                sub.title = format!("{} views in {mode} mode", subset.len() / report.methods.len());
                sub.provenance = prov.clone();
                sub.write(out, &format!("report_{mode}"))?;
                print!("\n{}", sub.render_table());
            }
        }
    }
    Ok(())
}

fn render_frames(stack: &GeoStack, traj: &Trajectory) -> Result<Vec<View>> {
    traj.frames
        .iter()
        .map(|f| {
            let src = stack
                .image(&f.transform.source_image_id)
                .ok_or_else(|| CliError::Input(format!("unknown image {:?}", f.transform.source_image_id)))?;
            Ok(View {
                id: format!("traj{:03}_f{:02}", traj.index, f.index),
                image: render_view(src, &f.transform)?,
                transform: f.transform.clone(),
                truth_px: f.target_px,
            })
        })
        .collect()
}

fn trajectory(cfg: RunConfig, out: &Path, stack_path: &Path, weights: Option<&Path>) -> Result<()> {
    let p = &cfg.protocol;
    if p.train_count >= p.count {
        return Err(CliError::Config(format!(
            "train_count {} leaves no test trajectories out of {}",
            p.train_count, p.count
        )));
    }
    cfg.trajectory.validate()?;
    let stack = load_stack(stack_path)?.stack;
    create_dir(&out.join("trajectories"))?;
    cfg.write(out)?;
    let mut prov = BTreeMap::new();
    prov.insert("stack".to_string(), stack_fingerprint(&stack));
    prov.insert("config".to_string(), cfg.hash());

    let indices: Vec<usize> = (0..p.count).collect();
    let trajs: Vec<Trajectory> = par_map(&indices, cfg.threads, |_, &i| simulate_trajectory(&cfg.trajectory, &stack, i))
        .into_iter()
        .collect::<std::result::Result<_, _>>()?;
    for t in &trajs {
        t.write(&out.join("trajectories").join(format!("traj_{:03}.txt", t.index)))?;
    }
    let rendered: Vec<Vec<View>> = par_map(&trajs, cfg.threads, |_, t| render_frames(&stack, t))
        .into_iter()
        .collect::<Result<_>>()?;
    let (train_views, test_views) = rendered.split_at(p.train_count);

    let w = match weights {
        Some(path) => {
            prov.insert("weights".to_string(), hash_input(path)?);
            read_weights(path)?
        }
        None => {
            check_view_size(&cfg, cfg.trajectory.view_size)?;
            let examples: Vec<Example> = train_views
                .iter()
                .flatten()
                .map(|v| Example::from_raster(&v.image, v.truth_px))
                .collect();
            let w = fit(&cfg, &examples, out)?;
            prov.insert("weights".to_string(), hash_input(&out.join("weights.bin"))?);
            w
        }
    };

    let reference = cfg.eval.reference.clone();
    let mut frames = Vec::new();
    let mut entries = Vec::new();
    for (k, views) in test_views.iter().enumerate() {
        let index = p.train_count + k;
        let mut per_method: Vec<(Method, Vec<FrameResult>)> = Vec::new();
        if let Some(id) = &reference {
            let mut settings = baseline_settings(&cfg);
            // Separate prior-noise streams per trajectory.
            settings.seed = stream_key(cfg.seed, domain::TRAJECTORY, index as u64);
            per_method.push((Method::Baseline, evaluate_baseline(&stack, id, views, &settings, cfg.threads)?));
        }
        let learned = evaluate_learned(&w, views, cfg.threads)?;
        per_method.push((Method::Learned, learned.into_iter().map(|o| o.result).collect()));
        for (method, results) in per_method {
            let errors: Vec<f64> = results.iter().map(|r| r.error).collect();
            let verdict = judge_trajectory(&errors, &p.success)?;
            entries.push(TrajectoryEntry { index, method, verdict });
            frames.extend(results);
        }
    }
    entries.sort_by_key(|e| (e.method, e.index));
    let mut report = compute_metrics(&frames)?;
    report.title = format!(
        "{} test trajectories of {} frames (trained on {})",
        test_views.len(),
        cfg.trajectory.frames,
        if weights.is_some() { "given weights".to_string() } else { format!("{} trajectories", p.train_count) }
    );
    report.trajectories = entries;
    report.provenance = prov.clone();
    report.config = config_json(&cfg);
    report.write(out, "report")?;
    write_file(&out.join("frames.tsv"), results_to_text(&frames).as_bytes())?;
    write_provenance(out, &prov)?;
    print!("{}", report.render_table());
    Ok(())
}

fn report(paths: &[PathBuf]) -> Result<()> {
    for (i, path) in paths.iter().enumerate() {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let report: EvalReport =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if i > 0 {
            println!();
        }
        println!("== {}", path.display());
        print!("{}", report.render_table());
    }
    Ok(())
}
