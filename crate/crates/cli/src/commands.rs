//! Command dispatch.

use std::fmt::Write as _;

use ccc_core::spectrum::{default_r2max, SpectrumTable};
use ccc_core::uniformity::cw_partner_candidates;
use ccc_core::{
    eds_check, euclidean_partners, gu_check_two_level, gu_subgroup_search, is_lattice_direct,
    kissing_stats, nsm_estimate, partner_bruteforce, partner_lemma1, presets, spectrum_at,
    theorem1_report, BigInt, CodeChain, Covolume, GuVerdict, NsmEstimate64, Point,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chainfile::{parse_chain, print_chain, ParseError};
use crate::report::{InputInfo, Outcome, Report, Status};
use crate::{ChainSource, Cli, Command, PartnerMode};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Core(#[from] ccc_core::Error),
}

impl CliError {
    /// 2 for input errors, 3 for internal consistency failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(ccc_core::Error::Inconsistent(_)) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            3 => "internal",
            _ => "input",
        }
    }
}

type Res<T> = Result<T, CliError>;

struct Loaded {
    chain: CodeChain,
    info: InputInfo,
}

fn load(src: &ChainSource, stdin: impl FnOnce() -> std::io::Result<String>) -> Res<Loaded> {
    let (chain, source) = match (&src.path, &src.preset) {
        (_, Some(name)) => (presets::by_name(name)?, format!("preset:{name}")),
        (Some(path), None) => {
            let text = if path == "-" {
                stdin().map_err(|e| CliError::Input(format!("cannot read standard input: {e}")))?
            } else {
                std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read '{path}': {e}")))?
            };
            (parse_chain(&text)?, path.clone())
        }
        (None, None) => return Err(CliError::Input("no chain given (path or --preset)".into())),
    };
    let digest = Sha256::digest(print_chain(&chain).as_bytes());
    let info = InputInfo {
        source,
        n: chain.n(),
        levels: chain.levels(),
        sha256: hex::encode(digest),
    };
    Ok(Loaded { chain, info })
}

fn parse_point(flag: &str, s: &str) -> Res<Point> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map(Point)
        .map_err(|_| {
            CliError::Input(format!(
                "--{flag} expects comma-separated integers, got '{s}'"
            ))
        })
}

fn table_json(t: &SpectrumTable) -> Value {
    json!({
        "center": t.center,
        "r2max": t.r2max,
        "d2min": t.d2min(),
        "total": t.total(),
        "table": t.counts.iter().map(|(d2, c)| json!({"d2": d2, "count": c})).collect::<Vec<_>>(),
    })
}

fn table_tsv(t: &SpectrumTable) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["d2".to_string(), "count".to_string()]];
    rows.extend(
        t.counts
            .iter()
            .map(|(d2, c)| vec![d2.to_string(), c.to_string()]),
    );
    rows
}

fn table_human(t: &SpectrumTable, out: &mut String) {
    writeln!(out, "{:>8}  {:>10}", "d2", "count").unwrap();
    for (d2, c) in &t.counts {
        writeln!(out, "{d2:>8}  {c:>10}").unwrap();
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

const LIST_LIMIT: usize = 32;

/// Executes a command without rendering it.
pub fn execute(cli: &Cli, stdin: impl FnOnce() -> std::io::Result<String>) -> Res<Outcome> {
    let name = cli.command.name().to_string();
    let mut human = String::new();
    let mut tsv = None;
    let (args, input, status, result) = match &cli.command {
        Command::Info { chain } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let codes: Vec<Value> = chain
                .codes()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "level": i + 1,
                        "size": c.size(),
                        "linear": c.is_linear(),
                        "dimension": c.dimension(),
                        "words": c.words(),
                    })
                })
                .collect();
            let covolume = Covolume::of(&chain).ok();
            let kissing = kissing_stats(&chain).ok();
            writeln!(
                human,
                "n = {}, L = {}, modulus = {}",
                chain.n(),
                chain.levels(),
                chain.modulus()
            )
            .unwrap();
            for (i, c) in chain.codes().iter().enumerate() {
                let dim = c
                    .dimension()
                    .map_or("nonlinear".to_string(), |d| format!("dim {d}"));
                let words: Vec<String> = c
                    .words()
                    .iter()
                    .take(LIST_LIMIT)
                    .map(|w| w.to_string())
                    .collect();
                let more = if c.size() > LIST_LIMIT { ", ..." } else { "" };
                writeln!(
                    human,
                    "C{} ({} words, {dim}): {{{}{more}}}",
                    i + 1,
                    c.size(),
                    words.join(", ")
                )
                .unwrap();
            }
            writeln!(
                human,
                "linear: {}, nested: {}",
                yes_no(chain.is_linear()),
                yes_no(chain.is_nested())
            )
            .unwrap();
            writeln!(
                human,
                "residues mod {}: {}",
                chain.modulus(),
                chain.residue_count()
            )
            .unwrap();
            if let Some(v) = covolume {
                writeln!(human, "covolume: {}/{}", v.numerator, v.denominator).unwrap();
            }
            if let Some(k) = &kissing {
                let vals: Vec<String> = k.kissing_values.iter().map(|v| v.to_string()).collect();
                writeln!(
                    human,
                    "d2min: {}, kissing numbers: {{{}}}",
                    k.d2min,
                    vals.join(", ")
                )
                .unwrap();
            }
            let result = json!({
                "modulus": chain.modulus(),
                "linear": chain.is_linear(),
                "nested": chain.is_nested(),
                "residue_count": chain.residue_count().to_string(),
                "covolume": covolume,
                "kissing": kissing,
                "codes": codes,
            });
            (json!({}), Some(info), Status::Ok, result)
        }

        Command::Lattice { chain } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let (is_lattice, witness) = is_lattice_direct(&chain)?;
            writeln!(human, "lattice: {}", yes_no(is_lattice)).unwrap();
            if let Some(w) = &witness {
                writeln!(
                    human,
                    "witness: {} + {} = {} mod {} is not a residue",
                    w.s,
                    w.t,
                    w.sum,
                    chain.modulus()
                )
                .unwrap();
            }
            let result = json!({"is_lattice": is_lattice, "witness": witness});
            (
                json!({}),
                Some(info),
                Status::from_holds(is_lattice),
                result,
            )
        }

        Command::Theorem1 { chain } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let r = theorem1_report::<BigInt>(&chain)?;
            let v = r.verdicts();
            writeln!(
                human,
                "residue set closed under addition:  {}",
                yes_no(v[0])
            )
            .unwrap();
            writeln!(
                human,
                "equals its lattice closure:         {}",
                yes_no(v[1])
            )
            .unwrap();
            writeln!(
                human,
                "Schur closed (C_i*C_i in C_i+1):    {}",
                yes_no(v[2])
            )
            .unwrap();
            writeln!(
                human,
                "equals Construction D:              {}",
                yes_no(v[3])
            )
            .unwrap();
            writeln!(
                human,
                "closure det: {}, Construction D det: {}",
                r.lambda_c_determinant,
                r.lambda_d_determinant
                    .as_deref()
                    .unwrap_or("undefined (not nested)")
            )
            .unwrap();
            if let Some(w) = &r.closure_witness {
                writeln!(human, "closure witness: {} + {} = {}", w.s, w.t, w.sum).unwrap();
            }
            if let Some(w) = &r.schur_witness {
                writeln!(
                    human,
                    "Schur witness: level {}: {} * {} = {}",
                    w.level, w.x, w.y, w.product
                )
                .unwrap();
            }
            let holds = r.is_lattice;
            (
                json!({}),
                Some(info),
                Status::from_holds(holds),
                serde_json::to_value(&r).unwrap(),
            )
        }

        Command::Spectrum {
            chain,
            center,
            r2max,
        } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let c = parse_point("center", center)?;
            let t = spectrum_at(&chain, &c, *r2max)?;
            writeln!(human, "spectrum at {} up to d2 = {}", t.center, t.r2max).unwrap();
            table_human(&t, &mut human);
            tsv = Some(table_tsv(&t));
            (
                json!({"center": c, "r2max": r2max}),
                Some(info),
                Status::Ok,
                table_json(&t),
            )
        }

        Command::Eds { chain, r2max } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let r2 = r2max.unwrap_or_else(|| default_r2max(&chain));
            let r = eds_check(&chain, r2)?;
            writeln!(
                human,
                "equal distance spectra up to d2 = {}: {}",
                r.r2max,
                yes_no(r.holds)
            )
            .unwrap();
            writeln!(
                human,
                "distinct spectra among residues: {}",
                r.distinct_tables
            )
            .unwrap();
            if let Some(w) = &r.witness {
                writeln!(
                    human,
                    "witness: N({}, d2={}) = {} but N({}, d2={}) = {}",
                    w.c, w.d2, w.count_c, w.c_prime, w.d2, w.count_c_prime
                )
                .unwrap();
            }
            writeln!(human, "reference spectrum at {}:", r.reference.center).unwrap();
            table_human(&r.reference, &mut human);
            tsv = Some(table_tsv(&r.reference));
            let result = json!({
                "holds": r.holds,
                "r2max": r.r2max,
                "distinct_tables": r.distinct_tables,
                "witness": r.witness,
                "reference": table_json(&r.reference),
            });
            (
                json!({"r2max": r2}),
                Some(info),
                Status::from_holds(r.holds),
                result,
            )
        }

        Command::Gu { chain } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let r = gu_check_two_level(&chain)?;
            writeln!(
                human,
                "geometrically uniform via coordinate reflections: {}",
                yes_no(r.holds)
            )
            .unwrap();
            writeln!(human, "{:<24} {:<24} valid", "residue", "signs").unwrap();
            for c in r.certificates.iter().take(LIST_LIMIT) {
                let signs: Vec<&str> = c
                    .signs
                    .iter()
                    .map(|&s| if s > 0 { "+" } else { "-" })
                    .collect();
                writeln!(
                    human,
                    "{:<24} {:<24} {}",
                    c.x.to_string(),
                    signs.join(""),
                    yes_no(c.valid)
                )
                .unwrap();
            }
            if r.certificates.len() > LIST_LIMIT {
                writeln!(human, "... {} certificates in total", r.certificates.len()).unwrap();
            }
            (
                json!({}),
                Some(info),
                Status::from_holds(r.holds),
                serde_json::to_value(&r).unwrap(),
            )
        }

        Command::GuSearch { chain, r2max } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let r2 = r2max.unwrap_or_else(|| default_r2max(&chain));
            let r = gu_subgroup_search(&chain, r2)?;
            let verdict = serde_json::to_value(r.verdict).unwrap();
            writeln!(human, "verdict: {}", verdict.as_str().unwrap()).unwrap();
            if let Some(w) = &r.eds_witness {
                writeln!(
                    human,
                    "spectrum witness: N({}, d2={}) = {} but N({}, d2={}) = {}",
                    w.c, w.d2, w.count_c, w.c_prime, w.d2, w.count_c_prime
                )
                .unwrap();
            }
            if let Some(p) = &r.unmatched {
                writeln!(
                    human,
                    "no signed permutation maps residue {p} to the origin"
                )
                .unwrap();
            }
            for iso in r.isometries.iter().take(LIST_LIMIT) {
                writeln!(
                    human,
                    "perm {:?} signs {:?} shift {}",
                    iso.permutation, iso.signs, iso.translation
                )
                .unwrap();
            }
            let status = Status::from_holds(r.verdict == GuVerdict::Certified);
            (
                json!({"r2max": r2}),
                Some(info),
                status,
                serde_json::to_value(&r).unwrap(),
            )
        }

        Command::Partner {
            chain,
            mode,
            x,
            y,
            xp,
        } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let (x, y, xp) = (
                parse_point("x", x)?,
                parse_point("y", y)?,
                parse_point("xp", xp)?,
            );
            let mode_name = match mode {
                PartnerMode::Lemma1 => "lemma1",
                PartnerMode::CwBrute => "cw-brute",
                PartnerMode::EuclidBrute => "euclid-brute",
            };
            let args = json!({"mode": mode_name, "x": x, "y": y, "xp": xp});
            let (found, result) = match mode {
                PartnerMode::Lemma1 => {
                    let (p, trace) = partner_lemma1(&chain, &x, &y, &xp)?;
                    writeln!(human, "partner: {p}").unwrap();
                    writeln!(human, "delta cases: {:?}", trace.cases).unwrap();
                    (true, json!({"partner": p, "trace": trace}))
                }
                PartnerMode::CwBrute => {
                    let partner = partner_bruteforce(&chain, &x, &y, &xp)?;
                    match &partner {
                        Some(p) => writeln!(human, "partner: {p}").unwrap(),
                        None => writeln!(human, "partner: none").unwrap(),
                    }
                    let mut candidates = Vec::new();
                    for p in cw_partner_candidates(&x, &y, &xp) {
                        let member = chain.contains(&p)?;
                        writeln!(human, "candidate {p} member: {}", yes_no(member)).unwrap();
                        candidates.push(json!({"point": p, "member": member}));
                    }
                    (
                        partner.is_some(),
                        json!({"partner": partner, "candidates": candidates}),
                    )
                }
                PartnerMode::EuclidBrute => {
                    let all = euclidean_partners(&chain, &x, &y, &xp)?;
                    let d2 = x.sub(&y).norm2();
                    match all.first() {
                        Some(p) => {
                            writeln!(human, "partner: {p} (d2 = {d2}, {} solutions)", all.len())
                                .unwrap()
                        }
                        None => writeln!(human, "partner: none at d2 = {d2}").unwrap(),
                    }
                    for p in all.iter().take(LIST_LIMIT) {
                        writeln!(human, "  {p}").unwrap();
                    }
                    (
                        !all.is_empty(),
                        json!({"partner": all.first(), "d2": d2, "solutions": all}),
                    )
                }
            };
            (args, Some(info), Status::from_holds(found), result)
        }

        Command::Nsm {
            chain,
            samples,
            seed,
        } => {
            let Loaded { chain, info } = load(chain, stdin)?;
            let est: NsmEstimate64 = nsm_estimate(&chain, *samples, *seed)?;
            let cubic = 1.0 / 12.0;
            let z = (est.value - cubic) / est.stderr;
            writeln!(
                human,
                "NSM: {:.6} ± {:.6} ({} samples, seed {})",
                est.value, est.stderr, est.samples, est.seed
            )
            .unwrap();
            writeln!(human, "cubic 1/12 = {cubic:.6}, z = {z:.2}").unwrap();
            let mut result = serde_json::to_value(&est).unwrap();
            result["cubic"] = json!(cubic);
            result["z_vs_cubic"] = json!(z);
            (
                json!({"samples": samples, "seed": seed}),
                Some(info),
                Status::Ok,
                result,
            )
        }

        Command::Dplus { n } => {
            let chain = presets::dplus(*n)?;
            let text = print_chain(&chain);
            human.push_str(&text);
            let result = json!({
                "n": n,
                "residue_count": chain.residue_count().to_string(),
                "chain_file": text,
            });
            (json!({"n": n}), None, Status::Ok, result)
        }

        Command::Presets => {
            let entries: Vec<(&str, CodeChain, &str)> = vec![
                (
                    "example1",
                    presets::example1(),
                    "C1={00,11}, C2={00}; not a lattice, geometrically uniform",
                ),
                (
                    "example3",
                    presets::example3(),
                    "n=1, C1=C2={0,1}, C3={0}; kissing number varies",
                ),
                (
                    "example5",
                    presets::example5(),
                    "three copies of {000,011,101,110}; no coordinate-wise partner",
                ),
                (
                    "dplus4",
                    presets::dplus(4)?,
                    "repetition in even-weight, n=4; any dplusN with N >= 2 works",
                ),
            ];
            let mut rows = Vec::new();
            for (name, c, desc) in &entries {
                writeln!(human, "{name:<10} n={} L={}  {desc}", c.n(), c.levels()).unwrap();
                rows.push(
                    json!({"name": name, "n": c.n(), "levels": c.levels(), "description": desc}),
                );
            }
            (json!({}), None, Status::Ok, json!({"presets": rows}))
        }
    };
    Ok(Outcome {
        report: Report {
            command: name,
            args,
            input,
            status,
            result,
            runtime_ms: None,
        },
        human,
        tsv,
    })
}
