use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tpcalc::ainf::{Category, TensorChain};
use tpcalc::entropy::{
    dehn_conelength_bounds, entropy_estimate, floer_action_model, EntropyMode, EtaProfile, IterateSequence, LengthSpectrum,
};
use tpcalc::filtered_complex::{cone_length, homology_barcode, ConeMode, FilteredComplex};
use tpcalc::fukaya_models::{approximability_certificate, model_from_descriptor, oc_evaluate, oracle_enumerate, Model, OracleValue, Query};
use tpcalc::hochschild::{boundary_depth_of, hochschild_barcode};
use tpcalc::morse::{build_1d, build_torus, verify, verify_torus};
use tpcalc::novikov_complex::{concise_barcode, FloerComplex};
use tpcalc::persistence::{metric, shift_invariant, Barcode, Metric};
use tpcalc::q::{fmt_q, parse_q};
use tpcalc::{Error, Ext, Nov, Q};

#[derive(Parser)]
#[command(name = "tpcalc", version, about = "Filtered homological algebra and Fukaya models of S² and T²")]
struct Cli {
    /// Default precision for truncated Novikov series.
    #[arg(long, global = true, env = "TPCALC_PRECISION", default_value = "20")]
    precision: String,
    /// Write the main output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Barcode of a filtered complex over Z2, or the concise barcode of a Novikov complex.
    Barcode {
        input: PathBuf,
        #[arg(long)]
        novikov: bool,
    },
    /// Distance between two barcodes.
    Distance {
        #[arg(long, default_value = "dint")]
        metric: String,
        #[arg(long)]
        shift_invariant: bool,
        a: PathBuf,
        b: PathBuf,
    },
    /// Weighted cone length over the ground field.
    Conelength {
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "to_target")]
        mode: String,
        input: PathBuf,
    },
    /// Emit a model category as JSON, or check the A∞ relations of one.
    Model {
        #[command(flatten)]
        model: ModelArgs,
        /// Check the relations on a category file instead.
        #[arg(long)]
        verify: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
    /// Approximability certificate of a model.
    Certify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Hochschild barcode of a model, or the boundary depth of a chain.
    Hochschild {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long)]
        degree: Option<i64>,
        /// A chain such as "pt_L,pt_L" or "T^1/2 e_L,pt_L + pt_L".
        #[arg(long)]
        depth_of: Option<String>,
    },
    /// Entropy bounds for the Dehn-twist and geodesic families, or an estimate from a CSV.
    Entropy {
        #[arg(value_enum)]
        family: Family,
        #[arg(long, default_value = "slow")]
        mode: String,
        #[arg(long, default_value_t = 1)]
        k_min: u64,
        #[arg(long, default_value_t = 50)]
        k_max: u64,
        #[arg(long, default_value = "1/32")]
        eps: String,
        #[arg(long)]
        spectrum: Option<PathBuf>,
        /// Entropy of a synthetic spectrum, used when no file is given.
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, default_value = "1009/1008")]
        sigma: String,
        #[arg(long, default_value = "1")]
        delta: String,
        /// A CSV with columns k,N_k for `estimate`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Small-variation Morse function on a circle or flat torus.
    Morse {
        #[arg(long, default_value = "1/10")]
        k: String,
        #[arg(long, default_value = "1/2")]
        delta: String,
        #[arg(long, default_value = "1/1000")]
        eta: String,
        #[arg(long, default_value = "1")]
        circumference: String,
        #[arg(long)]
        torus: bool,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        /// Dump `sample,value` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare tabulated products and OC values with direct polygon counts.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated generator names; all tabulated entries when absent.
        #[arg(long)]
        tensor: Option<String>,
        #[arg(long)]
        oc: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Dehn,
    Geodesic,
    Estimate,
}

#[derive(Args)]
struct ModelArgs {
    /// `single`, `sphere`, `torus`, or a descriptor such as `sphere:3`, `torus:2x2`.
    #[arg(long, default_value = "single")]
    model: String,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Second torus dimension.
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long, default_value = "0")]
    h: String,
}

impl ModelArgs {
    fn descriptor(&self) -> String {
        match (self.model.as_str(), self.n) {
            ("sphere", Some(n)) => format!("sphere:{n}"),
            ("sphere", None) => "sphere:2".into(),
            ("torus", n) => format!("torus:{}x{}", n.unwrap_or(1), self.ny.unwrap_or(1)),
            (d, _) => d.into(),
        }
    }

    fn build(&self, precision: Q) -> Result<Model, Error> {
        model_from_descriptor(&self.descriptor(), parse_q(&self.h)?, precision)
    }
}

fn read(p: &Path) -> Result<String, Error> {
    std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
}

fn ext_str(e: &Ext) -> String {
    match e {
        Ext::Fin(x) => fmt_q(x),
        Ext::Inf => "inf".into(),
    }
}

fn parse_chain(a: &Category, s: &str) -> Result<TensorChain, Error> {
    let mut c = TensorChain::new();
    for term in s.split('+') {
        let term = term.trim();
        let (coef, rest) = match term.split_once(' ') {
            Some((x, r)) if x.starts_with('T') => (x.parse::<Nov>()?, r),
            _ => (Nov::one(), term),
        };
        let t = rest.split(',').map(|g| a.gen_id(g.trim())).collect::<Result<Vec<_>, _>>()?;
        tpcalc::ainf::add_term(&mut c, t, &coef);
    }
    Ok(c)
}

fn run(cli: &Cli) -> Result<String, Error> {
    let precision = parse_q(&cli.precision)?;
    Ok(match &cli.cmd {
        Cmd::Barcode { input, novikov } => {
            let s = read(input)?;
            if *novikov {
                concise_barcode(&FloerComplex::parse_json(&s)?)?.to_json()
            } else {
                homology_barcode(&FilteredComplex::parse_json(&s)?)?.to_json()
            }
        }
        Cmd::Distance { metric: m, shift_invariant: si, a, b } => {
            let m: Metric = m.parse()?;
            let (a, b) = (Barcode::parse_json(&read(a)?)?, Barcode::parse_json(&read(b)?)?);
            let d = if *si { shift_invariant(m, &a, &b)? } else { metric(m, &a, &b)? };
            ext_str(&d)
        }
        Cmd::Conelength { eps, mode, input } => {
            let mode: ConeMode = mode.parse()?;
            let c = FilteredComplex::parse_json(&read(input)?)?;
            let cl = cone_length(&c, parse_q(eps)?, mode)?;
            cl.decomposition.verify()?;
            cl.value.to_string()
        }
        Cmd::Model { model, verify, max_len } => {
            let cat = match verify {
                Some(p) => Category::parse_json(&read(p)?)?,
                None => model.build(precision)?.cat,
            };
            let r = cat.verify_ainf(*max_len);
            if !r.passed() {
                return Err(Error::Verification(format!("A∞ relations fail: {}", r.failures.join("; "))));
            }
            if verify.is_some() {
                serde_json::json!({"checked": r.checked, "uncheckable": r.uncheckable.len()}).to_string()
            } else {
                cat.to_json()
            }
        }
        Cmd::Certify { model, eps } => {
            let m = model.build(precision)?;
            let eps = eps.as_deref().map(parse_q).transpose()?;
            let c = approximability_certificate(&m, eps)?;
            if c.within == Some(false) {
                return Err(Error::Verification(format!("accuracy {} exceeds ε\n{}", fmt_q(&c.accuracy), c.to_json())));
            }
            c.to_json()
        }
        Cmd::Hochschild { model, n_max, degree, depth_of } => {
            let m = model.build(precision)?;
            match depth_of {
                Some(s) => {
                    let c = parse_chain(&m.cat, s)?;
                    serde_json::json!({
                        "depth": ext_str(&boundary_depth_of(&m.cat, &c, *n_max)?),
                        "oc": oc_evaluate(&m, &c)?.to_json_value(),
                    })
                    .to_string()
                }
                None => hochschild_barcode(&m.cat, *n_max, *degree)?.to_json(),
            }
        }
        Cmd::Entropy { family, mode, k_min, k_max, eps, spectrum, h, sigma, delta, input } => {
            let mode: EntropyMode = mode.parse()?;
            let (seq, bounds) = match family {
                Family::Dehn => {
                    let (bars, bounds) = dehn_conelength_bounds(*k_min..=*k_max, parse_q(eps)?)?;
                    (bars, Some(bounds.values))
                }
                Family::Geodesic => {
                    let p = EtaProfile::standard(parse_q(sigma)?)?;
                    let delta = parse_q(delta)?;
                    let spec = match spectrum {
                        Some(f) => LengthSpectrum::parse(&read(f)?)?,
                        None => {
                            let top = p.sigma * Q::from_integer(*k_max as i64);
                            LengthSpectrum::synthetic(*h, top, Q::new(1, 100))?
                        }
                    };
                    let seq = IterateSequence::from_fn(*k_min..=*k_max, |n| {
                        floer_action_model(&spec, &p, n).map(|m| m.certified_count(delta)).unwrap_or(0)
                    });
                    (seq, None)
                }
                Family::Estimate => {
                    let f = input.as_ref().ok_or_else(|| Error::Parse("estimate needs --input".into()))?;
                    (parse_sequence(&read(f)?)?, None)
                }
            };
            let est = entropy_estimate(&seq, mode)?;
            eprintln!("{}", serde_json::json!({"estimate": est.value, "window": [est.window.0, est.window.1]}));
            seq.csv(bounds.as_deref())
        }
        Cmd::Morse { k, delta, eta, circumference, torus, grid, csv } => {
            let (k, delta, eta, c) = (parse_q(k)?, parse_q(delta)?, parse_q(eta)?, parse_q(circumference)?);
            let report = if *torus {
                let t = build_torus(k, delta, eta, c, c)?;
                verify_torus(&t, *grid)
            } else {
                let f = build_1d(k, delta, eta, c)?;
                if let Some(p) = csv {
                    std::fs::write(p, f.to_csv(*grid)).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
                }
                verify(&f, *grid)
            };
            let out = serde_json::to_string_pretty(&report).expect("report serializes");
            if !report.passed() {
                return Err(Error::Verification(out));
            }
            out
        }
        Cmd::Oracle { model, tensor, oc } => {
            let m = model.build(precision)?;
            let mut queries = Vec::new();
            match tensor {
                Some(t) => {
                    let t = t.split(',').map(|g| m.cat.gen_id(g.trim())).collect::<Result<Vec<_>, _>>()?;
                    queries.push(if *oc { Query::Oc(t) } else { Query::Mu(t) });
                }
                None => {
                    queries.extend(m.cat.table_entries().map(|(t, _)| Query::Mu(t.clone())));
                    queries.extend(m.oc_table().map(|(t, _)| Query::Oc(t.clone())));
                }
            }
            let mut rows = Vec::new();
            let mut mismatches = 0;
            for qy in &queries {
                let geo = match oracle_enumerate(&m, qy) {
                    Ok(v) => v,
                    Err(Error::Precondition(_)) if tensor.is_none() => continue,
                    Err(e) => return Err(e),
                };
                let (t, table, geo) = match (qy, geo) {
                    (Query::Mu(t), OracleValue::Mu(v)) => (t, vec_json(&m, &m.cat.mu(t)?), vec_json(&m, &v)),
                    (Query::Oc(t), OracleValue::Oc(v)) => {
                        let c = tpcalc::ainf::pure(t.clone());
                        (t, oc_evaluate(&m, &c)?.to_json_value(), v.to_json_value())
                    }
                    _ => unreachable!("oracle answers in kind"),
                };
                let agree = table == geo;
                mismatches += usize::from(!agree);
                rows.push(serde_json::json!({
                    "tensor": m.cat.tuple_name(t),
                    "kind": if matches!(qy, Query::Oc(_)) { "oc" } else { "mu" },
                    "table": table,
                    "oracle": geo,
                    "agree": agree,
                }));
            }
            let out = serde_json::to_string_pretty(&rows).expect("rows serialize");
            if mismatches > 0 {
                return Err(Error::Verification(format!("{mismatches} entries disagree\n{out}")));
            }
            out
        }
    })
}

fn vec_json(m: &Model, v: &tpcalc::ainf::Vector) -> serde_json::Value {
    serde_json::Value::Object(v.iter().map(|(g, c)| (m.cat.gens[*g].name.clone(), c.to_string().into())).collect())
}

fn parse_sequence(s: &str) -> Result<IterateSequence, Error> {
    let mut ks = Vec::new();
    let mut vals = Vec::new();
    for (no, line) in s.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('k') || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',');
        let bad = || Error::Parse(format!("line {}: expected k,N_k", no + 1));
        let k: u64 = it.next().and_then(|x| x.trim().parse().ok()).ok_or_else(bad)?;
        let v: u64 = it.next().and_then(|x| x.trim().parse().ok()).ok_or_else(bad)?;
        if let Some(&last) = ks.last() {
            if k != last + 1 {
                return Err(Error::Parse(format!("line {}: k must increase by one", no + 1)));
            }
        }
        ks.push(k);
        vals.push(v);
    }
    Ok(IterateSequence::new(ks.first().copied().unwrap_or(1), vals))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 4,
        Error::Coverage(_) => 3,
        Error::Verification(_) | Error::Precondition(_) | Error::ModulusMismatch(..) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let out = if out.ends_with('\n') { out } else { out + "\n" };
            match &cli.out {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, out) {
                        eprintln!("error: {}: {e}", p.display());
                        return ExitCode::from(4);
                    }
                }
                None => print!("{out}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
