use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use ics_transfer::contraction::{default_merge_eps, ContractionConstants};
use ics_transfer::{Ics, Perturbation, PhaseSpace, Point, Potential, PotentialSpec, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Constants,
    Contract,
    Gibbs,
    SpectralGap,
    StabilityPotential,
    StabilityMap,
    OtSelftest,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Constants => "constants",
            Experiment::Contract => "contract",
            Experiment::Gibbs => "gibbs",
            Experiment::SpectralGap => "spectral-gap",
            Experiment::StabilityPotential => "stability-potential",
            Experiment::StabilityMap => "stability-map",
            Experiment::OtSelftest => "ot-selftest",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    #[default]
    Sine,
    Shift,
}

impl PerturbationKind {
    pub fn with(self, eps: f64) -> Perturbation {
        match self {
            PerturbationKind::Sine => Perturbation::Sine { eps },
            PerturbationKind::Shift => Perturbation::Shift { eps },
        }
    }
}

/// The JSON experiment document. Inline flags fill the same fields.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    /// Test function for `spectral-gap`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<PotentialSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diam: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lip: Option<f64>,
    /// Overrides of the block length `N` and the step `t` in `constants`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbations: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation_kind: Option<PerturbationKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Point>,
    /// Number of random measure pairs in `ot-selftest`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    /// Largest support of a random measure in `ot-selftest`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SystemName {
    Doubling,
    CircleMap,
    Tent,
    FullShift,
    Cantor,
    DiscFold,
    TriangleFold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PotentialName {
    Const,
    Sine,
    Cosine,
    Linear,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// JSON experiment file; inline flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: results].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_enum, help_heading = "System")]
    pub system: Option<SystemName>,
    /// Degree of a circle map.
    #[arg(long, help_heading = "System")]
    pub degree: Option<u32>,
    /// Sine perturbation amplitude of a circle map.
    #[arg(long, allow_hyphen_values = true, help_heading = "System")]
    pub map_eps: Option<f64>,
    /// Left slope of the tent map.
    #[arg(long, help_heading = "System")]
    pub slope: Option<f64>,
    /// Alphabet size of the full shift.
    #[arg(long, help_heading = "System")]
    pub symbols: Option<u8>,
    /// Metric parameter of the full shift.
    #[arg(long, help_heading = "System")]
    pub shift_theta: Option<f64>,
    /// Word length representing shift sequences.
    #[arg(long, help_heading = "System")]
    pub depth: Option<usize>,

    #[arg(long, value_enum, help_heading = "Potential")]
    pub potential: Option<PotentialName>,
    /// Constant term [default: -ln(number of branches)].
    #[arg(long, allow_hyphen_values = true, help_heading = "Potential")]
    pub base: Option<f64>,
    /// Amplitude of sine/cosine, slope of linear.
    #[arg(long, allow_hyphen_values = true, help_heading = "Potential")]
    pub amplitude: Option<f64>,

    #[arg(long, help_heading = "Constants")]
    pub theta: Option<f64>,
    #[arg(long, help_heading = "Constants")]
    pub diam: Option<f64>,
    #[arg(long, help_heading = "Constants")]
    pub lip: Option<f64>,
    /// Override of the block length N.
    #[arg(long, help_heading = "Constants")]
    pub big_n: Option<u32>,
    /// Override of the step t.
    #[arg(long, help_heading = "Constants")]
    pub t: Option<u32>,

    /// Number of iterations.
    #[arg(long = "n")]
    pub n_max: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub merge_eps: Option<f64>,
    /// Eigenfunction grid size, or lemma grid size in stability-map.
    #[arg(long = "grid")]
    pub grid_size: Option<usize>,
    /// Comma-separated perturbation sizes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub perturbations: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub perturbation_kind: Option<PerturbationKind>,
    /// Start points on real spaces; use a config file for other spaces.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub atoms: Option<usize>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn overlay<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

/// Config file (if any) with the inline flags laid over it.
pub fn merge(experiment: Option<Experiment>, flags: Flags) -> Result<ExperimentConfig, String> {
    let mut cfg = match &flags.config {
        Some(path) => load(path)?,
        None => ExperimentConfig::default(),
    };
    match (experiment, cfg.experiment) {
        (Some(e), Some(f)) if e != f => {
            return Err(format!("config names experiment {} but {} was requested", f.name(), e.name()))
        }
        (Some(e), _) => cfg.experiment = Some(e),
        (None, None) => return Err("no experiment given; name one in the config or as a subcommand".into()),
        (None, Some(_)) => {}
    }
    if let Some(name) = flags.system {
        cfg.system = Some(system_from_flags(name, &flags)?);
    } else if flags.degree.is_some() || flags.map_eps.is_some() || flags.slope.is_some() || flags.symbols.is_some() {
        return Err("system parameters given without --system".into());
    }
    if let Some(name) = flags.potential {
        let arity = match &cfg.system {
            Some(spec) => Ics::from_spec(spec.clone()).map_err(|e| e.to_string())?.arity(),
            None => 2,
        };
        let base = flags.base.unwrap_or(-(arity as f64).ln());
        let amplitude = flags.amplitude.unwrap_or(0.0);
        cfg.potential = Some(match name {
            PotentialName::Const => PotentialSpec::Constant { value: base },
            PotentialName::Sine => PotentialSpec::Sine { base, amplitude },
            PotentialName::Cosine => PotentialSpec::Cosine { base, amplitude },
            PotentialName::Linear => PotentialSpec::Linear { base, slope: amplitude },
        });
    } else if flags.base.is_some() || flags.amplitude.is_some() {
        return Err("potential parameters given without --potential".into());
    }
    overlay(&mut cfg.theta, flags.theta);
    overlay(&mut cfg.diam, flags.diam);
    overlay(&mut cfg.lip, flags.lip);
    overlay(&mut cfg.big_n, flags.big_n);
    overlay(&mut cfg.t, flags.t);
    overlay(&mut cfg.n_max, flags.n_max);
    overlay(&mut cfg.tol, flags.tol);
    overlay(&mut cfg.merge_eps, flags.merge_eps);
    overlay(&mut cfg.grid_size, flags.grid_size);
    overlay(&mut cfg.perturbations, flags.perturbations);
    overlay(&mut cfg.perturbation_kind, flags.perturbation_kind);
    overlay(&mut cfg.x, flags.x.map(Point::Real));
    overlay(&mut cfg.y, flags.y.map(Point::Real));
    overlay(&mut cfg.x0, flags.x0.map(Point::Real));
    overlay(&mut cfg.pairs, flags.pairs);
    overlay(&mut cfg.atoms, flags.atoms);
    overlay(&mut cfg.seed, flags.seed);
    overlay(&mut cfg.out, flags.out);
    Ok(cfg)
}

fn system_from_flags(name: SystemName, f: &Flags) -> Result<SystemSpec, String> {
    Ok(match name {
        SystemName::Doubling => SystemSpec::Doubling,
        SystemName::CircleMap => SystemSpec::CircleMap {
            degree: f.degree.ok_or("--system circle-map needs --degree")?,
            perturbation: f.map_eps.map_or(Perturbation::None, |eps| Perturbation::Sine { eps }),
        },
        SystemName::Tent => SystemSpec::Tent { slope: f.slope.ok_or("--system tent needs --slope")? },
        SystemName::FullShift => SystemSpec::FullShift {
            k: f.symbols.unwrap_or(2),
            theta: f.shift_theta.unwrap_or(0.5),
            depth: f.depth.unwrap_or(ics_transfer::space::DEFAULT_SYMBOLIC_DEPTH),
        },
        SystemName::Cantor => return Ok(Ics::cantor().spec().clone()),
        SystemName::DiscFold => SystemSpec::DiscFold,
        SystemName::TriangleFold => SystemSpec::TriangleFold,
    })
}

/// Everything an experiment needs, validated before any computation.
#[derive(Clone, Debug)]
pub struct Job {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: PathBuf,
    /// The config with every default filled in, echoed into the JSON summary.
    pub resolved: ExperimentConfig,
    pub task: Task,
}

#[derive(Clone, Debug)]
pub enum Task {
    Constants(ContractionConstants),
    Contract {
        system: Ics,
        potential: Potential,
        grid_size: usize,
        x: Point,
        y: Point,
        n_max: usize,
        merge_eps: f64,
        overrides: Overrides,
    },
    Gibbs {
        system: Ics,
        potential: Potential,
        grid_size: usize,
        x0: Point,
        tol: f64,
        merge_eps: f64,
    },
    SpectralGap {
        system: Ics,
        potential: Potential,
        observable: Potential,
        grid_size: usize,
        x0: Point,
        tol: f64,
        merge_eps: f64,
        n_max: usize,
    },
    StabilityPotential {
        system: Ics,
        perturbations: Vec<f64>,
        x0: Point,
        tol: f64,
        merge_eps: f64,
    },
    StabilityMap {
        system: Ics,
        degree: u32,
        kind: PerturbationKind,
        perturbations: Vec<f64>,
        grid_size: usize,
        x0: Point,
        tol: f64,
        merge_eps: f64,
    },
    OtSelftest {
        space: PhaseSpace,
        pairs: usize,
        atoms: usize,
    },
}

/// User-supplied replacements for `Lip(A_h)`, `N` and `t` in the contraction constants.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub lip: Option<f64>,
    pub n: Option<u32>,
    pub t: Option<u32>,
}

const DEFAULT_PERTURBATIONS: [f64; 4] = [0.01, 0.02, 0.05, 0.1];

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{name} must be positive and finite, got {v}"))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize, String> {
    if v >= min {
        Ok(v)
    } else {
        Err(format!("{name} must be at least {min}, got {v}"))
    }
}

fn point_in(space: &PhaseSpace, name: &str, p: Point) -> Result<Point, String> {
    space.check(&p).map_err(|e| format!("{name}: {e}"))?;
    Ok(p)
}

/// First node of a coarse net; planar corners may lie outside the region.
fn default_start(space: &PhaseSpace) -> Result<Point, String> {
    space.grid_points(64).into_iter().next().ok_or_else(|| "no default start point; set x0".to_string())
}

pub fn validate(cfg: ExperimentConfig) -> Result<Job, String> {
    let experiment = cfg.experiment.ok_or("no experiment given")?;
    let mut r = cfg.clone();
    r.seed = Some(cfg.seed.unwrap_or(0));
    r.out = Some(cfg.out.clone().unwrap_or_else(|| PathBuf::from("results")));

    let task = if experiment == Experiment::Constants {
        let theta = cfg.theta.ok_or("constants needs theta")?;
        let diam = cfg.diam.ok_or("constants needs diam")?;
        let lip = cfg.lip.ok_or("constants needs lip")?;
        Task::Constants(
            ContractionConstants::with_overrides(theta, diam, lip, cfg.big_n, cfg.t).map_err(|e| e.to_string())?,
        )
    } else {
        let spec = cfg.system.clone().unwrap_or(SystemSpec::Doubling);
        let system = Ics::from_spec(spec.clone()).map_err(|e| e.to_string())?;
        let space = system.space().clone();
        r.system = Some(spec);
        let k = system.arity() as f64;
        let pspec = cfg.potential.clone().unwrap_or(PotentialSpec::Constant { value: -k.ln() });
        let potential = Potential::from_spec(pspec.clone(), &space).map_err(|e| e.to_string())?;
        let grid_size = at_least("grid_size", cfg.grid_size.unwrap_or(512), 2)?;
        let tol = positive("tol", cfg.tol.unwrap_or(1e-6))?;
        let x0 = point_in(&space, "x0", cfg.x0.clone().map_or_else(|| default_start(&space), Ok)?)?;
        let n_max = at_least("n_max", cfg.n_max.unwrap_or(20), 1)?;
        let merge_eps = cfg.merge_eps.unwrap_or(match experiment {
            Experiment::Contract => default_merge_eps(1e-5, n_max),
            _ => default_merge_eps(tol, 40),
        });
        if !(merge_eps.is_finite() && merge_eps >= 0.0) {
            return Err(format!("merge_eps must be nonnegative, got {merge_eps}"));
        }
        let perturbations = cfg.perturbations.clone().unwrap_or(DEFAULT_PERTURBATIONS.to_vec());
        if perturbations.is_empty() || perturbations.iter().any(|e| !e.is_finite()) {
            return Err("perturbations must be a nonempty list of finite numbers".into());
        }
        let (uses_potential, uses_tol) = match experiment {
            Experiment::Contract => (true, false),
            Experiment::Gibbs | Experiment::SpectralGap => (true, true),
            Experiment::StabilityPotential | Experiment::StabilityMap => (false, true),
            Experiment::Constants | Experiment::OtSelftest => (false, false),
        };
        if uses_potential {
            r.potential = Some(pspec);
            r.grid_size = Some(grid_size);
        }
        if uses_tol {
            r.tol = Some(tol);
            r.x0 = Some(x0.clone());
            r.merge_eps = Some(merge_eps);
        }
        match experiment {
            Experiment::Constants => unreachable!(),
            Experiment::Contract => {
                let x = cfg.x.clone().map(|p| point_in(&space, "x", p)).transpose()?;
                let y = cfg.y.clone().map(|p| point_in(&space, "y", p)).transpose()?;
                let (x, y) = match (x, y) {
                    (Some(x), Some(y)) => (x, y),
                    (x, y) => {
                        let mut rng = crate::sample::rng(r.seed.unwrap());
                        let sx = crate::sample::point(&space, &mut rng);
                        let sy = crate::sample::point(&space, &mut rng);
                        (x.unwrap_or(sx), y.unwrap_or(sy))
                    }
                };
                r.x = Some(x.clone());
                r.y = Some(y.clone());
                r.n_max = Some(n_max);
                r.merge_eps = Some(merge_eps);
                if let Some(lip) = cfg.lip {
                    if !(lip.is_finite() && lip >= 0.0) {
                        return Err(format!("lip must be nonnegative, got {lip}"));
                    }
                }
                let overrides = Overrides { lip: cfg.lip, n: cfg.big_n, t: cfg.t };
                Task::Contract { system, potential, grid_size, x, y, n_max, merge_eps, overrides }
            }
            Experiment::Gibbs => Task::Gibbs { system, potential, grid_size, x0, tol, merge_eps },
            Experiment::SpectralGap => {
                let ospec = cfg.observable.clone().unwrap_or(PotentialSpec::Cosine { base: 0.0, amplitude: 1.0 });
                let observable = Potential::from_spec(ospec.clone(), &space).map_err(|e| e.to_string())?;
                let n_max = cfg.n_max.unwrap_or(12);
                r.observable = Some(ospec);
                r.n_max = Some(n_max);
                Task::SpectralGap { system, potential, observable, grid_size, x0, tol, merge_eps, n_max }
            }
            Experiment::StabilityPotential => {
                r.perturbations = Some(perturbations.clone());
                Task::StabilityPotential { system, perturbations, x0, tol, merge_eps }
            }
            Experiment::StabilityMap => {
                let (degree, _) = system
                    .circle_map_data()
                    .ok_or("stability-map needs a circle map system (doubling or circle_map)")?;
                let kind = cfg.perturbation_kind.unwrap_or_default();
                r.perturbations = Some(perturbations.clone());
                r.perturbation_kind = Some(kind);
                r.grid_size = Some(grid_size);
                Task::StabilityMap { system, degree, kind, perturbations, grid_size, x0, tol, merge_eps }
            }
            Experiment::OtSelftest => {
                let pairs = at_least("pairs", cfg.pairs.unwrap_or(20), 1)?;
                let atoms = at_least("atoms", cfg.atoms.unwrap_or(40), 1)?;
                r.pairs = Some(pairs);
                r.atoms = Some(atoms);
                Task::OtSelftest { space, pairs, atoms }
            }
        }
    };
    let out = r.out.take().unwrap();
    Ok(Job { experiment, seed: r.seed.unwrap(), out, resolved: r, task })
}
