use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rskyline_core::datagen::{
    derive_noisy, generate, ingest_csv, CsvOptions, Distribution, GenSpec, NoiseSpec,
};
use rskyline_core::index::default_fanout;
use rskyline_core::{build_artree, ARTree, Point, RTree};

use crate::args::WorkloadArgs;
use crate::error::CliError;

/// One of the `--products/--customers/--candidates` forms.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Path(PathBuf),
    Generated {
        dist: Option<Distribution>,
        n: usize,
    },
    Noise {
        variance: f64,
        n: Option<usize>,
    },
}

impl FromStr for Source {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = |what: &str| CliError::Usage(format!("{what} in data source {s:?}"));
        if let Ok(n) = s.parse::<usize>() {
            return Ok(Source::Generated { dist: None, n });
        }
        if let Some(rest) = s.strip_prefix("noise:") {
            let mut parts = rest.splitn(2, ':');
            let variance: f64 = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| bad("bad variance"))?;
            if !variance.is_finite() || variance < 0.0 {
                return Err(bad("negative variance"));
            }
            let n = match parts.next() {
                Some(n) => Some(n.parse().map_err(|_| bad("bad count"))?),
                None => None,
            };
            return Ok(Source::Noise { variance, n });
        }
        if let Some((dist, n)) = s.split_once(':') {
            if let (Ok(dist), Ok(n)) = (dist.parse::<Distribution>(), n.parse::<usize>()) {
                return Ok(Source::Generated {
                    dist: Some(dist),
                    n,
                });
            }
        }
        Ok(Source::Path(PathBuf::from(s)))
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Path(p) => write!(f, "{}", p.display()),
            Source::Generated { dist: None, n } => write!(f, "{n}"),
            Source::Generated { dist: Some(d), n } => write!(f, "{d:?}:{n}"),
            Source::Noise { variance, n: None } => write!(f, "noise:{variance}"),
            Source::Noise {
                variance,
                n: Some(n),
            } => write!(f, "noise:{variance}:{n}"),
        }
    }
}

/// Data and indexes for one run.
pub struct Workload {
    pub products: Vec<Point>,
    pub customers: Vec<Point>,
    pub candidates: Vec<Point>,
    pub dim: usize,
    pub fanout: usize,
    pub product_tree: RTree,
    /// Built with subtree counts so every evaluator can use it.
    pub customer_tree: ARTree,
}

fn read_points(path: &PathBuf) -> Result<Vec<Point>, CliError> {
    // Files written by `gen` carry an id column; detect it from the header.
    let head = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("{}: {e}", path.display())))?;
    let id_column = head
        .lines()
        .find(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
        .is_some_and(|l| l.split(',').next().is_some_and(|c| c.trim().eq_ignore_ascii_case("id")));
    ingest_csv(
        path,
        CsvOptions {
            normalize: false,
            id_column,
        },
    )
    .map_err(|e| CliError::Runtime(anyhow::anyhow!("{}: {e}", path.display())))
}

fn materialize(
    role: &str,
    source: &Source,
    args: &WorkloadArgs,
    dim: usize,
    seed: u64,
    products: Option<&[Point]>,
) -> Result<Vec<Point>, CliError> {
    let points = match source {
        Source::Path(path) => read_points(path)?,
        Source::Generated { n: 0, .. } => Vec::new(),
        Source::Generated { dist, n } => generate(&GenSpec {
            distribution: dist.unwrap_or_else(|| args.dist.into()),
            n: *n,
            dim,
            seed,
        })?,
        Source::Noise { variance, n } => {
            let Some(products) = products else {
                return Err(CliError::Usage(format!("{role} cannot be derived by noise")));
            };
            let take = n.unwrap_or(products.len());
            if take > products.len() {
                return Err(CliError::Usage(format!(
                    "{role}: noise source asks for {take} points but there are {} products",
                    products.len()
                )));
            }
            derive_noisy(
                &products[..take],
                &NoiseSpec {
                    variance: *variance,
                    seed,
                },
            )?
        }
    };
    if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
        return Err(CliError::Usage(format!(
            "{role} have dimension {} but the workload has {dim}",
            bad.dim()
        )));
    }
    Ok(points)
}

impl Workload {
    pub fn build(args: &WorkloadArgs) -> Result<Self, CliError> {
        let p_src: Source = args.products.parse()?;
        let c_src: Source = args.customers.parse()?;
        let q_src: Source = args.candidates.parse()?;

        let products = match &p_src {
            Source::Path(path) => read_points(path)?,
            other => materialize("products", other, args, args.d as usize, args.seed, None)?,
        };
        let Some(first) = products.first() else {
            return Err(CliError::Usage("the product set is empty".into()));
        };
        let dim = first.dim();
        let customers = materialize(
            "customers",
            &c_src,
            args,
            dim,
            args.seed.wrapping_add(1),
            Some(&products),
        )?;
        if customers.is_empty() {
            return Err(CliError::Usage("the customer set is empty".into()));
        }
        let candidates = materialize(
            "candidates",
            &q_src,
            args,
            dim,
            args.seed.wrapping_add(2),
            Some(&products),
        )?;

        let fanout = match args.fanout {
            Some(f) => f as usize,
            None => default_fanout(dim, args.page_bytes as usize),
        };
        let product_tree = RTree::bulk_load(&products, fanout)?;
        let customer_tree = build_artree(&customers, fanout)?;
        Ok(Workload {
            products,
            customers,
            candidates,
            dim,
            fanout,
            product_tree,
            customer_tree,
        })
    }
}
