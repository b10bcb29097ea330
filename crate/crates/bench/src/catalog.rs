//! Named test systems with known singular zeros.
//!
//! Small hand-written systems are built in. The larger benchmark systems
//! ship as JSON files under `data/` (or `$SNEWTON_DATA_DIR`); a missing or
//! corrupt file only removes that entry.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use snewton_core::{parse_system, PolySystem, C64};

/// Breadth, depth and multiplicity of a singular zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub kappa: usize,
    pub depth: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub vars: Vec<String>,
    pub system: PolySystem,
    pub zero: Vec<C64>,
    /// `None` for a non-isolated zero.
    pub expected: Option<Structure>,
    /// Jacobian rank tolerance that separates the kernel at 2-digit guesses.
    pub tau: f64,
    /// Relative rank tolerance for the dual-space computation.
    pub rank_tol: f64,
    /// Bound on `||f(zero)||`.
    pub zero_tol: f64,
    pub source: String,
    /// Part of the effectiveness benchmark set.
    pub benchmark: bool,
}

impl CatalogEntry {
    pub fn zero_residual(&self) -> f64 {
        self.system
            .residual(&self.zero)
            .expect("catalog zero matches its system")
    }
}

/// Why a data-file entry could not be served.
#[derive(Clone, Debug, Serialize)]
pub struct Unavailable {
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    pub unavailable: Vec<Unavailable>,
}

impl Catalog {
    /// Exact name match, or `stability-K` for the cluster system with
    /// parameter `K`.
    pub fn get(&self, name: &str) -> Option<CatalogEntry> {
        if let Some(e) = self.entries.iter().find(|e| e.name == name) {
            return Some(e.clone());
        }
        let k = name.strip_prefix("stability-")?.parse().ok()?;
        Some(stability(k))
    }

    pub fn benchmarks(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(|e| e.benchmark)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }
}

/// Data files in the order they are listed.
pub const DATA_FILES: [&str; 6] = ["cbms1", "cbms2", "mth191", "kss", "caprasse", "cyclic9"];

pub fn default_data_dir() -> PathBuf {
    std::env::var_os("SNEWTON_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data"))
}

/// Built-in systems plus the benchmark data files from the default
/// directory.
pub fn catalog() -> Catalog {
    catalog_from(&default_data_dir())
}

pub fn catalog_from(dir: &Path) -> Catalog {
    let mut cat = Catalog {
        entries: builtin(),
        unavailable: Vec::new(),
    };
    for file in DATA_FILES {
        let path = dir.join(format!("{file}.json"));
        match load_entry(&path) {
            Ok(e) => cat.entries.push(e),
            Err(reason) => cat.unavailable.push(Unavailable {
                name: file.to_string(),
                reason,
            }),
        }
    }
    cat
}

#[derive(Deserialize)]
struct DataFile {
    name: String,
    source: String,
    vars: Vec<String>,
    polys: Vec<String>,
    zero: Vec<[f64; 2]>,
    kappa: usize,
    depth: usize,
    multiplicity: usize,
    tau: f64,
    #[serde(default = "default_rank_tol")]
    rank_tol: f64,
    #[serde(default = "default_zero_tol")]
    zero_tol: f64,
}

fn default_rank_tol() -> f64 {
    snewton_core::dual::DEFAULT_RANK_TOL
}

fn default_zero_tol() -> f64 {
    1e-8
}

pub fn load_entry(path: &Path) -> Result<CatalogEntry, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_entry(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_entry(text: &str) -> Result<CatalogEntry, String> {
    let d: DataFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let system = parse_system(&d.polys.join("\n"), &d.vars).map_err(|e| e.to_string())?;
    if d.zero.len() != d.vars.len() {
        return Err(format!(
            "zero has {} coordinates for {} variables",
            d.zero.len(),
            d.vars.len()
        ));
    }
    let entry = CatalogEntry {
        name: d.name,
        vars: d.vars,
        system,
        zero: d.zero.iter().map(|&[re, im]| C64::new(re, im)).collect(),
        expected: Some(Structure {
            kappa: d.kappa,
            depth: d.depth,
            multiplicity: d.multiplicity,
        }),
        tau: d.tau,
        rank_tol: d.rank_tol,
        zero_tol: d.zero_tol,
        source: d.source,
        benchmark: true,
    };
    let r = entry.zero_residual();
    if !(r <= entry.zero_tol) {
        return Err(format!(
            "residual {r:e} at the listed zero exceeds {:e}",
            entry.zero_tol
        ));
    }
    Ok(entry)
}

fn names(vars: &[&str]) -> Vec<String> {
    vars.iter().map(|s| s.to_string()).collect()
}

fn real(xs: &[f64]) -> Vec<C64> {
    xs.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn builtin_entry(
    name: &str,
    vars: &[&str],
    text: &str,
    zero: &[f64],
    expected: Option<(usize, usize, usize)>,
    tau: f64,
) -> CatalogEntry {
    let vars = names(vars);
    CatalogEntry {
        name: name.to_string(),
        system: parse_system(text, &vars).expect("built-in system parses"),
        vars,
        zero: real(zero),
        expected: expected.map(|(kappa, depth, multiplicity)| Structure {
            kappa,
            depth,
            multiplicity,
        }),
        tau,
        rank_tol: snewton_core::dual::DEFAULT_RANK_TOL,
        zero_tol: 1e-8,
        source: "built-in".to_string(),
        benchmark: false,
    }
}

const XYZ: [&str; 3] = ["x", "y", "z"];

pub fn running_example() -> CatalogEntry {
    builtin_entry(
        "running-example",
        &XYZ,
        "x^2 - x + y + z - 2\ny^2 + x - y + z - 2\nz^2 + x + y - z - 2",
        &[1.0, 1.0, 1.0],
        Some((2, 2, 4)),
        0.1,
    )
}

/// Non-isolated zero (the line `x = 0`) that still passes the deflation-one
/// test.
pub fn x2_xy() -> CatalogEntry {
    builtin_entry("x2-xy", &["x", "y"], "x^2\nx*y", &[0.0, 0.0], None, 0.1)
}

/// Satisfies the order-two dual-space test but is not deflation-one.
pub fn x2_z3xy_y2() -> CatalogEntry {
    builtin_entry(
        "x2-z3xy-y2",
        &XYZ,
        "x^2\nz^3 + x*y\ny^2",
        &[0.0, 0.0, 0.0],
        Some((3, 5, 12)),
        0.1,
    )
}

/// `[x^3 + z sin y, y^3 + x sin z, z^3 + y sin x]` with `sin t` cut to
/// `t - t^3/6`.
pub fn truncated_sin() -> CatalogEntry {
    builtin_entry(
        "truncated-sin",
        &XYZ,
        "x^3 + z*(y - y^3/6)\ny^3 + x*(z - z^3/6)\nz^3 + y*(x - x^3/6)",
        &[0.0, 0.0, 0.0],
        Some((3, 4, 11)),
        0.1,
    )
}

/// `[x^2, y^2, z^2 + 10^-k z]`: zeros at the origin and `(0, 0, -10^-k)`.
pub fn stability(k: i32) -> CatalogEntry {
    let vars = names(&XYZ);
    let mut system = parse_system("x^2\ny^2\nz^2", &vars).expect("parses");
    let z = snewton_core::Poly::var(3, 2).scale(C64::new(10f64.powi(-k), 0.0));
    let polys: Vec<_> = system
        .polys()
        .iter()
        .enumerate()
        .map(|(i, p)| if i == 2 { p + &z } else { p.clone() })
        .collect();
    system = PolySystem::new(3, polys).expect("same shape");
    CatalogEntry {
        name: format!("stability-{k}"),
        vars,
        system,
        zero: real(&[0.0, 0.0, 0.0]),
        expected: Some(Structure {
            kappa: 2,
            depth: 2,
            multiplicity: 4,
        }),
        tau: 1e-2,
        rank_tol: snewton_core::dual::DEFAULT_RANK_TOL,
        zero_tol: 1e-8,
        source: "built-in".to_string(),
        benchmark: false,
    }
}

/// `[x - y^2, x^2 - y^2]`, where deflation plus Gauss-Newton stalls at a
/// stationary point away from the origin.
pub fn robustness_pair() -> CatalogEntry {
    builtin_entry(
        "robustness-pair",
        &["x", "y"],
        "x - y^2\nx^2 - y^2",
        &[0.0, 0.0],
        Some((1, 1, 2)),
        0.1,
    )
}

pub fn builtin() -> Vec<CatalogEntry> {
    vec![
        running_example(),
        x2_xy(),
        x2_z3xy_y2(),
        truncated_sin(),
        stability(2),
        robustness_pair(),
    ]
}
