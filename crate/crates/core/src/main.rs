use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qsieve::analytic::{kappa_search, rhs_final, threshold_search};
use qsieve::frey::{
    build_curve, division_poly_constant, isogeny_identity_check, level_recipe, random_triples, reduce_and_trace,
};
use qsieve::irred::{default_aux_primes, irreducible_outside};
use qsieve::pipeline::{character_report, load_forms, parse_kappa, render_report, replay, Config};
use qsieve::quadfield::{fundamental_unit, make_field};
use qsieve::solutions::{search_c_pm1, search_general};
use qsieve::unitgenus::{classify_unit, tables_csv, TablePresentation};
use qsieve::Result;

#[derive(Parser)]
#[command(name = "qsieve", version, about = "Modular-method toolkit for x^4 - d*y^2 = z^p over Q(sqrt(d))")]
struct Cli {
    /// Emit versioned JSON reports.
    #[arg(long, global = true)]
    json: bool,
    /// JSON configuration file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampled property checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Presentation {
    Published,
    Refined,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Corrected,
    Printed,
}

#[derive(Subcommand)]
enum Cmd {
    /// Field data and fundamental unit.
    Classify {
        #[arg(long)]
        d: u64,
    },
    /// Genus classification of the fundamental unit.
    UnitGenus {
        #[arg(long)]
        d: u64,
    },
    /// Unit/genus tables as CSV.
    Tables {
        #[arg(long, value_enum, default_value_t = Presentation::Published)]
        presentation: Presentation,
    },
    /// Nebentypus, local components of the Hecke character and compatibility checks.
    Character {
        #[arg(long)]
        d: u64,
        #[arg(long, value_enum)]
        e_rule: Option<Rule>,
    },
    /// Level and Nebentypus after level lowering.
    Level {
        #[arg(long)]
        d: u64,
        /// Parity of C, used when 2 splits.
        #[arg(long)]
        c_even: Option<bool>,
    },
    /// Reduction type and trace of a Frey curve at the primes above q.
    Frey {
        #[arg(long)]
        d: u64,
        #[arg(long = "A", allow_hyphen_values = true)]
        a: i64,
        #[arg(long = "B", allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        q: Option<u64>,
        /// Also check division-polynomial constants and the isogeny identity on this many seeded random curves.
        #[arg(long, default_value_t = 0)]
        sample: usize,
    },
    /// Primes outside which the residual representation is irreducible.
    Irred {
        #[arg(long)]
        d: u64,
        #[arg(long, value_delimiter = ',')]
        aux: Option<Vec<u64>>,
    },
    /// Trace sieve over newform data.
    Sieve {
        #[arg(long)]
        d: u64,
        #[arg(long, required = true)]
        forms: Vec<PathBuf>,
        #[arg(long)]
        pmin: Option<u64>,
        #[arg(long)]
        pmax: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        aux: Option<Vec<u64>>,
    },
    /// Analytic lower bound and exponent threshold.
    Ellenberg {
        #[arg(long = "D")]
        big_d: u64,
        /// κ as "num/den" or a decimal; defaults to the config grid.
        #[arg(long)]
        kappa: Option<String>,
        /// Evaluate the bound at this p instead of searching.
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        search: bool,
        #[arg(long)]
        trace_terms: bool,
    },
    /// Brute-force solution search.
    Search {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long = "H")]
        h: Option<u64>,
    },
    /// Run every stage for one field and state the conclusion.
    Replay {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        forms: Vec<PathBuf>,
    },
}

fn emit<T: Serialize>(json: bool, kind: &str, body: &T, text: impl FnOnce() -> String) -> Result<()> {
    if json {
        println!("{}", render_report(kind, body)?);
    } else {
        println!("{}", text());
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleCheck {
    a: i64,
    b: i64,
    d: u64,
    psi3_constant: String,
    psi5_constant: String,
    isogeny_identity: bool,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let json = cli.json;
    match cli.cmd {
        Cmd::Classify { d } => {
            let field = make_field(d)?;
            let unit = fundamental_unit(&field);
            #[derive(Serialize)]
            struct Out {
                field: qsieve::quadfield::QuadField,
                fundamental_unit: qsieve::quadfield::FundamentalUnit,
            }
            let text = format!(
                "d = {d}, disc = {}, 2 is {:?}, Q1/Q3/Q5/Q7 = {:?}/{:?}/{:?}/{:?}, eps = {} (norm {})",
                field.disc,
                field.two_splitting,
                field.q(1),
                field.q(3),
                field.q(5),
                field.q(7),
                unit.value,
                unit.norm
            );
            emit(json, "classify", &Out { field, fundamental_unit: unit }, || text)
        }
        Cmd::UnitGenus { d } => {
            let field = make_field(d)?;
            let r = classify_unit(&field, &fundamental_unit(&field))?;
            emit(json, "unit-genus", &r, || {
                format!("d = {d}: P- = {:?}, P+ = {:?}, d0 = {}, case {:?}", r.p_minus, r.p_plus, r.d0, r.genus_case)
            })
        }
        Cmd::Tables { presentation } => {
            let p = match presentation {
                Presentation::Published => TablePresentation::Published,
                Presentation::Refined => TablePresentation::Refined,
            };
            let csv = tables_csv(p)?;
            emit(json, "tables", &csv, || csv.trim_end().to_string())
        }
        Cmd::Character { d, e_rule } => {
            if let Some(r) = e_rule {
                cfg.e_rule = match r {
                    Rule::Corrected => "corrected".into(),
                    Rule::Printed => "printed".into(),
                };
            }
            let field = make_field(d)?;
            let r = character_report(&field, cfg.e_rule()?)?;
            emit(json, "character", &r, || {
                format!(
                    "d = {d}: Nebentypus conductor {} order {} fixed field {}; chi_2 conductor exponent {}; compatibility at -1 {}, at eps {}",
                    r.nebentypus.conductor,
                    r.nebentypus.order,
                    r.nebentypus.fixed_field,
                    r.chi.conductor_exponent,
                    r.compatibility.at_minus_one,
                    r.compatibility.at_epsilon
                )
            })
        }
        Cmd::Level { d, c_even } => {
            let r = level_recipe(&make_field(d)?, c_even)?;
            emit(json, "level", &r, || {
                format!("d = {d}: levels {:?}, Nebentypus fixed field {}", r.levels, r.nebentypus.fixed_field)
            })
        }
        Cmd::Frey { d, a, b, q, sample } => {
            let field = make_field(d)?;
            let curve = build_curve(a, b, &field)?;
            let traces = match q {
                Some(q) => reduce_and_trace(&curve, &field, q)?,
                None => Vec::new(),
            };
            let mut samples = Vec::new();
            for (a, b, d) in random_triples(cli.seed, sample, 50, 200) {
                let f = make_field(d)?;
                let c = build_curve(a, b, &f)?;
                samples.push(SampleCheck {
                    a,
                    b,
                    d,
                    psi3_constant: division_poly_constant(&c, 3)?.value.to_string(),
                    psi5_constant: division_poly_constant(&c, 5)?.value.to_string(),
                    isogeny_identity: isogeny_identity_check(&c),
                });
            }
            #[derive(Serialize)]
            struct Out {
                j_invariant: String,
                traces: Vec<qsieve::frey::TraceResult>,
                samples: Vec<SampleCheck>,
            }
            let out = Out { j_invariant: curve.j_invariant()?.to_string(), traces, samples };
            emit(json, "frey", &out, || {
                let mut s = format!("E_({a},{b}) over Q(sqrt({d})): j = {}", out.j_invariant);
                for t in &out.traces {
                    s += &format!(
                        "\n  q = {} ({:?}, f = {}): {:?}, a = {:?}",
                        t.q, t.splitting, t.residue_degree, t.reduction, t.a
                    );
                }
                for c in &out.samples {
                    s += &format!(
                        "\n  sample ({}, {}, {}): psi3 {} psi5 {} isogeny {}",
                        c.a, c.b, c.d, c.psi3_constant, c.psi5_constant, c.isogeny_identity
                    );
                }
                s
            })
        }
        Cmd::Irred { d, aux } => {
            let field = make_field(d)?;
            let aux = aux.or(cfg.irred_aux.clone()).unwrap_or_else(|| default_aux_primes(&field));
            let r = irreducible_outside(&field, &aux)?;
            emit(json, "irred", &r, || {
                format!(
                    "d = {d}, aux {:?}: unit term {}; irreducible outside {:?}",
                    aux,
                    r.unit_lcm.factorization.pretty(),
                    r.excluded_primes
                )
            })
        }
        Cmd::Sieve { d, forms, pmin, pmax, aux } => {
            let field = make_field(d)?;
            let aux = aux.unwrap_or(cfg.aux.clone());
            let range = (pmin.unwrap_or(cfg.pmin), pmax.unwrap_or(cfg.pmax));
            let records = load_forms(&forms)?;
            let ctx = qsieve::forms::SieveContext::new(&field, &aux)?;
            let verdicts = records.iter().map(|f| ctx.discard(f, range)).collect::<Result<Vec<_>>>()?;
            emit(json, "sieve", &verdicts, || {
                verdicts
                    .iter()
                    .map(|v| format!("{}: survivors in [{}, {}]: {:?}", v.label, range.0, range.1, v.survivors()))
                    .collect::<Vec<_>>()
                    .join("\n")
            })
        }
        Cmd::Ellenberg { big_d, kappa, p, search, trace_terms } => {
            let kappas = match &kappa {
                Some(k) => vec![parse_kappa(k)?],
                None => cfg.kappas()?,
            };
            let (lo, hi) = cfg.threshold_range;
            if let Some(p) = p.filter(|_| !search) {
                let b = rhs_final(p, kappas[0], big_d)?;
                return emit(json, "ellenberg-bound", &b, || {
                    let mut s = format!("p = {p}, x = {:.6}: main {:.12e}, rhs {:.12e}", b.x, b.main_term, b.rhs);
                    if trace_terms {
                        for (n, v) in &b.terms {
                            s += &format!("\n  {n} = {v:.12e}");
                        }
                    }
                    for g in &b.guard_violations {
                        s += &format!("\n  guard: {g}");
                    }
                    s
                });
            }
            let (k, r) = if kappas.len() == 1 {
                (kappas[0], threshold_search(kappas[0], big_d, lo, hi)?)
            } else {
                kappa_search(big_d, &kappas, lo, hi)?
            };
            let at = rhs_final(r.p_star, k, big_d)?;
            #[derive(Serialize)]
            struct Out {
                threshold: qsieve::analytic::ThresholdReport,
                at_threshold: qsieve::analytic::BoundBreakdown,
            }
            let out = Out { threshold: r, at_threshold: at };
            emit(json, "ellenberg", &out, || {
                let mut s = format!(
                    "D = {big_d}, kappa = {:.6e}: least prime with positive bound p* = {} (rhs {:.3e}); previous prime {} has rhs {:.3e}",
                    out.threshold.kappa,
                    out.threshold.p_star,
                    out.threshold.rhs_at_p_star,
                    out.threshold.prev_prime,
                    out.threshold.rhs_at_prev
                );
                if trace_terms {
                    for (n, v) in &out.at_threshold.terms {
                        s += &format!("\n  {n} = {v:.12e}");
                    }
                }
                s
            })
        }
        Cmd::Search { d, p, h } => {
            let records = match p {
                Some(p) => search_general(d, p, h.unwrap_or(cfg.general_h))?,
                None => search_c_pm1(d, h.unwrap_or(cfg.h))?,
            };
            emit(json, "search", &records, || {
                records
                    .iter()
                    .map(|r| format!("({}, {}, {}) p = {:?}", r.a, r.b, r.c, r.p))
                    .collect::<Vec<_>>()
                    .join("\n")
            })
        }
        Cmd::Replay { d, forms } => {
            let r = replay(d, &forms, &cfg)?;
            emit(json, "replay", &r, || {
                let mut s = String::new();
                for c in &r.checks {
                    s += &format!(
                        "{} {}: expected {}, got {}\n",
                        if c.pass { "ok  " } else { "FAIL" },
                        c.name,
                        c.expected,
                        c.actual
                    );
                }
                for n in &r.notes {
                    s += &format!("note: {n}\n");
                }
                s += &format!("theorem-consistent: {}\n{}", r.conclusion.theorem_consistent, r.conclusion.statement);
                s
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error {e}");
            ExitCode::FAILURE
        }
    }
}
