//! Command-line front end: argument parsing, the result cache and summary table rows.

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filling::{max_minimal_filling, min_filling, FillingJson, FillingKind, FillingResult, SearchOptions, SolverKind};
use crate::homology::{build_combinatorial_map, homology_span_rank};
use crate::hyperbolic::{critical_point, one_region_set, IndexOptions, DEFAULT_FD_STEP, DEFAULT_RANK_TOL};
use crate::surface::{build_surface, SurfaceModel, SurfaceParams};
use crate::symmetry::{subset_orbit_representatives, SymmetryGroup};
use crate::Bits;

pub const SCHEMA_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "SYSTOLE_CACHE_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;

/// Sources whose behaviour a cached result depends on, per kind.
fn code_version(kind: &str) -> String {
    let sources: &[&str] = match kind {
        "min" => &[
            include_str!("filling/minimum.rs"),
            include_str!("filling/solver.rs"),
            include_str!("filling/ilp.rs"),
            include_str!("filling/simplified.rs"),
            include_str!("filling/regions.rs"),
        ],
        "max" => &[include_str!("filling/maximum.rs"), include_str!("filling/regions.rs")],
        "rank" => &[include_str!("homology/mod.rs"), include_str!("homology/rank.rs"), include_str!("homology/map.rs")],
        _ => &[
            include_str!("hyperbolic/chart.rs"),
            include_str!("hyperbolic/geometry.rs"),
            include_str!("hyperbolic/index.rs"),
            include_str!("hyperbolic/polygon.rs"),
        ],
    };
    let mut h = Sha256::new();
    h.update(env!("CARGO_PKG_VERSION"));
    h.update(include_str!("surface.rs"));
    for s in sources {
        h.update(s);
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{:02x}", b)).collect()
}

fn checksum(payload: &Value) -> Result<String> {
    Ok(hex(&Sha256::digest(serde_json::to_vec(payload)?)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Computed,
    Cached,
    Skipped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub schema_version: u32,
    pub m: usize,
    pub kind: String,
    pub code_version: String,
    pub checksum: String,
    pub payload: Value,
}

/// Content-addressed results under `root/m{m}/{kind}.json`.
#[derive(Clone, Debug)]
pub struct Cache {
    pub root: Option<PathBuf>,
}

impl Cache {
    pub fn disabled() -> Cache {
        Cache { root: None }
    }

    pub fn at(root: impl Into<PathBuf>) -> Cache {
        Cache { root: Some(root.into()) }
    }

    pub fn path(&self, m: usize, kind: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(format!("m{}", m)).join(format!("{}.json", kind)))
    }

    /// A stored payload for the current code version. Stale entries read as
    /// misses; a checksum mismatch is an error.
    pub fn load(&self, m: usize, kind: &str) -> Result<Option<Value>> {
        let Some(path) = self.path(m, kind) else { return Ok(None) };
        if !path.exists() {
            return Ok(None);
        }
        let entry: CacheEntry = serde_json::from_str(&std::fs::read_to_string(&path)?)
            .map_err(|e| Error::Cache(format!("{}: unreadable entry ({})", path.display(), e)))?;
        if entry.schema_version != SCHEMA_VERSION || entry.m != m || entry.kind != kind {
            return Err(Error::Cache(format!("{}: entry does not match its key", path.display())));
        }
        if checksum(&entry.payload)? != entry.checksum {
            return Err(Error::Cache(format!("{}: checksum mismatch", path.display())));
        }
        if entry.code_version != code_version(kind) {
            return Ok(None);
        }
        Ok(Some(entry.payload))
    }

    pub fn store(&self, m: usize, kind: &str, payload: Value) -> Result<()> {
        let Some(path) = self.path(m, kind) else { return Ok(()) };
        std::fs::create_dir_all(path.parent().unwrap())?;
        let entry = CacheEntry {
            schema_version: SCHEMA_VERSION,
            m,
            kind: kind.to_string(),
            code_version: code_version(kind),
            checksum: checksum(&payload)?,
            payload,
        };
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(&entry)? + "\n")?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Builtin,
    Bridge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Column {
    Min,
    Max,
    Rank,
    Index,
}

#[derive(Debug, Parser)]
#[command(name = "systole", version, about = "Systoles and minimal filling sets of cube-dual tesselated hyperbolic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Surface parameter (m >= 5).
    #[arg(long, global = true, default_value_t = 5)]
    pub m: usize,
    /// Wall-clock limit in seconds for each search.
    #[arg(long, global = true)]
    pub time_limit: Option<f64>,
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = SolverArg::Builtin)]
    pub solver: SolverArg,
    #[arg(long, global = true)]
    pub no_symmetry_breaking: bool,
    #[arg(long, global = true, default_value_t = DEFAULT_FD_STEP)]
    pub fd_step: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    #[arg(long, global = true, default_value_t = crate::hyperbolic::chart::DEFAULT_NEWTON_TOL)]
    pub newton_tol: f64,
    /// Allow computations that are out of desk scale (m >= 7 optima and indices).
    #[arg(long, global = true)]
    pub unbounded_runtime: bool,
    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,
    /// Cache root; defaults to $SYSTOLE_CACHE_DIR, then ./cache.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub no_cache: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The systoles and their intersection graph.
    Surface,
    /// Smallest or largest minimal filling set.
    Filling {
        #[arg(value_enum)]
        kind: KindArg,
    },
    /// Rank of the span of all systoles in rational homology.
    Rank,
    /// Morse index of the systole function at the critical point.
    Index,
    /// Orbit representatives of subsets of the axis-1 family.
    Orbits {
        #[arg(long, default_value_t = 7)]
        max_size: usize,
    },
    /// One row of the summary table: m, genus, systoles, min, max, rank, index.
    Table {
        #[arg(long, value_enum, value_delimiter = ',')]
        skip: Vec<Column>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Min,
    Max,
}

impl Common {
    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            threads: self.threads.max(1),
            solver: match self.solver {
                SolverArg::Builtin => SolverKind::Builtin,
                SolverArg::Bridge => SolverKind::Bridge,
            },
            symmetry_breaking: !self.no_symmetry_breaking,
        }
    }

    pub fn index_options(&self) -> IndexOptions {
        IndexOptions { fd_step: self.fd_step, rank_tol: self.rank_tol, newton_tol: self.newton_tol }
    }

    pub fn cache(&self) -> Cache {
        if self.no_cache {
            return Cache::disabled();
        }
        let root = self
            .cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("cache"));
        Cache::at(root)
    }
}

/// A computed value with where it came from.
#[derive(Clone, Debug, Serialize)]
pub struct Cell<T> {
    pub value: Option<T>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<T: std::fmt::Display> Cell<T> {
    fn csv(&self) -> String {
        self.value.as_ref().map_or("-".to_string(), |v| v.to_string())
    }

    fn skipped(note: &str) -> Cell<T> {
        Cell { value: None, provenance: Provenance::Skipped, note: Some(note.to_string()) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub schema_version: u32,
    pub m: usize,
    pub genus: usize,
    pub systoles: usize,
    pub min: Cell<usize>,
    pub max: Cell<usize>,
    pub rank: Cell<usize>,
    pub index: Cell<usize>,
}

impl TableRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.m,
            self.genus,
            self.systoles,
            self.min.csv(),
            self.max.csv(),
            self.rank.csv(),
            self.index.csv()
        )
    }

    pub fn provenance_line(&self) -> String {
        let p = |c: &Provenance| serde_json::to_value(c).unwrap().as_str().unwrap().to_string();
        format!(
            "# provenance min={} max={} rank={} index={}",
            p(&self.min.provenance),
            p(&self.max.provenance),
            p(&self.rank.provenance),
            p(&self.index.provenance)
        )
    }
}

/// Everything the commands share: the model and cache, plus a flag raised when
/// a result is only partial.
pub struct Session {
    pub common: Common,
    pub model: SurfaceModel,
    pub cache: Cache,
    pub partial: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct StoredFilling {
    json: FillingJson,
    bound: Option<usize>,
    classes: Vec<Vec<String>>,
}

impl Session {
    pub fn new(common: Common) -> Result<Session> {
        let model = build_surface(SurfaceParams::new(common.m)?)?;
        let cache = common.cache();
        Ok(Session { common, model, cache, partial: false })
    }

    fn heavy(&self, kind: &str) -> bool {
        let m = self.model.m;
        match kind {
            "min" | "max" | "index" => m >= 7,
            _ => false,
        }
    }

    /// Cached or freshly computed filling result.
    pub fn filling(&mut self, kind: FillingKind) -> Result<(FillingResult, Provenance)> {
        let key = kind.as_str();
        if let Some(v) = self.cache.load(self.model.m, key)? {
            let stored: StoredFilling = serde_json::from_value(v)?;
            let set = stored.json.to_set(&self.model)?;
            let classes = stored
                .classes
                .iter()
                .map(|c| c.iter().map(|l| self.model.parse_label(l)).collect::<Result<Bits>>())
                .collect::<Result<Vec<_>>>()?;
            let res = FillingResult {
                m: self.model.m,
                kind,
                set,
                proved_optimal: stored.json.certificate.proved_optimal,
                cuts_used: stored.json.certificate.cuts_used,
                classes,
                bound: stored.bound,
            };
            return Ok((res, Provenance::Cached));
        }
        let opts = self.common.search_options();
        let res = match kind {
            FillingKind::Min => min_filling(&self.model, &opts)?,
            FillingKind::Max => max_minimal_filling(&self.model, &opts)?,
        };
        if res.proved_optimal {
            let stored = StoredFilling {
                json: res.to_json(&self.model),
                bound: res.bound,
                classes: res.classes.iter().map(|c| self.model.labels(c)).collect(),
            };
            self.cache.store(self.model.m, key, serde_json::to_value(stored)?)?;
        } else {
            self.partial = true;
        }
        Ok((res, Provenance::Computed))
    }

    pub fn rank(&mut self) -> Result<(usize, Provenance)> {
        if let Some(v) = self.cache.load(self.model.m, "rank")? {
            return Ok((serde_json::from_value(v)?, Provenance::Cached));
        }
        let r = homology_span_rank(&self.model, &Bits::full(self.model.n()))?;
        self.cache.store(self.model.m, "rank", serde_json::to_value(r)?)?;
        Ok((r, Provenance::Computed))
    }

    /// The critical point is computed from a one-region smallest filling set.
    pub fn index(&mut self) -> Result<(Value, Provenance)> {
        let opts = self.common.index_options();
        let defaults = opts.fd_step == DEFAULT_FD_STEP && opts.rank_tol == DEFAULT_RANK_TOL;
        if defaults {
            if let Some(v) = self.cache.load(self.model.m, "index")? {
                return Ok((v, Provenance::Cached));
            }
        }
        let (min, _) = self.filling(FillingKind::Min)?;
        let set = one_region_set(&self.model, &min.classes)?;
        let map = build_combinatorial_map(&self.model)?;
        let point = critical_point(&self.model, &map, &set, &opts)?;
        let json = serde_json::to_value(point.to_json(&self.model, &opts))?;
        if defaults {
            self.cache.store(self.model.m, "index", json.clone())?;
        }
        Ok((json, Provenance::Computed))
    }

    pub fn jacobian_csv(&mut self) -> Result<String> {
        let opts = self.common.index_options();
        let (min, _) = self.filling(FillingKind::Min)?;
        let set = one_region_set(&self.model, &min.classes)?;
        let map = build_combinatorial_map(&self.model)?;
        Ok(critical_point(&self.model, &map, &set, &opts)?.jacobian.to_csv())
    }

    pub fn table(&mut self, skip: &[Column]) -> Result<TableRow> {
        let resource = "skipped (resource-bound)";
        let by_flag = "skipped (by flag)";
        let cell = |this: &mut Session, col: Column| -> Result<Cell<usize>> {
            let kind = match col {
                Column::Min => "min",
                Column::Max => "max",
                Column::Rank => "rank",
                Column::Index => "index",
            };
            if skip.contains(&col) {
                return Ok(Cell::skipped(by_flag));
            }
            if this.heavy(kind) && !this.common.unbounded_runtime {
                return Ok(Cell::skipped(resource));
            }
            let (value, provenance, note) = match col {
                Column::Min | Column::Max => {
                    let k = if col == Column::Min { FillingKind::Min } else { FillingKind::Max };
                    match this.filling(k) {
                        Ok((r, p)) if r.proved_optimal => (Some(r.set.len()), p, None),
                        Ok((r, p)) => (Some(r.set.len()), p, Some("unproven (search stopped early)".to_string())),
                        Err(Error::Timeout(msg)) => {
                            this.partial = true;
                            (None, Provenance::Skipped, Some(format!("timed out: {}", msg)))
                        }
                        Err(e) => return Err(e),
                    }
                }
                Column::Rank => {
                    let (r, p) = this.rank()?;
                    (Some(r), p, None)
                }
                Column::Index => {
                    let (v, p) = this.index()?;
                    (v["index"].as_u64().map(|x| x as usize), p, None)
                }
            };
            Ok(Cell { value, provenance, note })
        };
        let min = cell(self, Column::Min)?;
        let max = cell(self, Column::Max)?;
        let rank = cell(self, Column::Rank)?;
        let index = cell(self, Column::Index)?;
        Ok(TableRow {
            schema_version: SCHEMA_VERSION,
            m: self.model.m,
            genus: self.model.genus,
            systoles: self.model.n(),
            min,
            max,
            rank,
            index,
        })
    }
}

fn filling_output(model: &SurfaceModel, res: &FillingResult, provenance: Provenance, format: OutputFormat) -> Result<String> {
    Ok(match format {
        OutputFormat::Csv => model.labels(&res.set).join("\n") + "\n",
        _ => {
            let mut v = serde_json::to_value(res.to_json(model))?;
            v["schema_version"] = SCHEMA_VERSION.into();
            v["provenance"] = serde_json::to_value(provenance)?;
            v["classes"] = res.classes.len().into();
            serde_json::to_string_pretty(&v)? + "\n"
        }
    })
}

/// Runs one parsed command and writes its output. Returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli, out, err) {
        Ok(partial) => {
            if partial {
                EXIT_TIMEOUT
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let mut s = Session::new(cli.common.clone())?;
    let format = cli.common.output;
    match cli.command {
        Command::Surface => {
            let text = match format.unwrap_or(OutputFormat::Json) {
                OutputFormat::Json => {
                    let mut v = serde_json::to_value(s.model.to_json())?;
                    v["schema_version"] = SCHEMA_VERSION.into();
                    serde_json::to_string_pretty(&v)? + "\n"
                }
                OutputFormat::Dot => s.model.to_dot(),
                OutputFormat::Csv => {
                    let mut t = String::from("index,label,axis,degree\n");
                    for (i, sys) in s.model.systoles.iter().enumerate() {
                        t.push_str(&format!("{},\"{}\",{},{}\n", i, sys, sys.axis, s.model.neighbors[i].len()));
                    }
                    t
                }
            };
            out.write_all(text.as_bytes())?;
        }
        Command::Filling { kind } => {
            let kind = if kind == KindArg::Min { FillingKind::Min } else { FillingKind::Max };
            if s.heavy(kind.as_str()) && !s.common.unbounded_runtime {
                return Err(Error::Invariant(format!(
                    "the {} filling search at m = {} is resource-bound; pass --unbounded-runtime to run it",
                    kind.as_str(),
                    s.model.m
                )));
            }
            let (res, p) = s.filling(kind)?;
            if !res.proved_optimal {
                writeln!(err, "warning: result not proven optimal")?;
            }
            out.write_all(filling_output(&s.model, &res, p, format.unwrap_or(OutputFormat::Json))?.as_bytes())?;
        }
        Command::Rank => {
            let (r, p) = s.rank()?;
            match format {
                Some(OutputFormat::Json) => {
                    let v = serde_json::json!({"schema_version": SCHEMA_VERSION, "m": s.model.m, "rank": r, "provenance": p});
                    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
                }
                _ => writeln!(out, "{}", r)?,
            }
        }
        Command::Index => {
            if s.heavy("index") && !s.common.unbounded_runtime {
                return Err(Error::Invariant(format!(
                    "the index at m = {} is resource-bound; pass --unbounded-runtime to run it",
                    s.model.m
                )));
            }
            match format {
                Some(OutputFormat::Csv) => out.write_all(s.jacobian_csv()?.as_bytes())?,
                _ => {
                    let (mut v, p) = s.index()?;
                    v["schema_version"] = SCHEMA_VERSION.into();
                    v["provenance"] = serde_json::to_value(p)?;
                    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
                }
            }
        }
        Command::Orbits { max_size } => {
            let group = SymmetryGroup::new(&s.model)?;
            let reps = subset_orbit_representatives(&s.model, &group, max_size);
            match format {
                Some(OutputFormat::Json) => {
                    let v = serde_json::json!({
                        "schema_version": SCHEMA_VERSION,
                        "m": s.model.m,
                        "max_size": max_size,
                        "count": reps.len(),
                        "representatives": reps.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
                }
                _ => writeln!(out, "{}", reps.len())?,
            }
        }
        Command::Table { skip } => {
            let row = s.table(&skip)?;
            match format {
                Some(OutputFormat::Json) => writeln!(out, "{}", serde_json::to_string_pretty(&row)?)?,
                _ => {
                    writeln!(out, "{}", row.csv())?;
                    writeln!(err, "{}", row.provenance_line())?;
                }
            }
        }
    }
    Ok(s.partial)
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let _ = write!(err, "{}", e);
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVARIANT,
            }
        }
    }
}
