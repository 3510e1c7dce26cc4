use std::fmt::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use qftree_core::axioms::validate_axioms;
use qftree_core::cograph::{
    encode_cotree_as_semilattice, graph_pairing, hom_density, induced_subgraph_check, interpret_cotree,
    parse_graph_formula, translate_formula,
};
use qftree_core::format::{
    read_cotree, read_graph, read_partition, read_tsl, write_graph, write_partition, write_reduction,
    write_tower, write_tsl,
};
use qftree_core::partition::{eps_partition, refine_partition, validate_partition};
use qftree_core::qf::battery::{enumerate_formulas, named_formula};
use qftree_core::qf::{
    dist_truncated, infer_arity, qf_sup_distance_p_with_budget, stone_pairing_exact_with_budget,
    stone_pairing_mc, type_distribution_with_budget,
};
use qftree_core::reduction::{build_tower, reduction_error_check, standard_reduction, verify_reduction, verify_tower};
use qftree_core::sampling::{
    concentration_experiment, sample_structure, uniformization_error_check, uniformize, SampledStructure,
};
use qftree_core::{parse_formula, Cotree, QfFormula, SimpleGraph, TreeSemilattice};

use crate::output::{pairs, Style, Table};
use crate::{Command, Global, Report};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| qftree_core::Error::Input(format!("{}: {e}", path.display())).into())
}

fn tree(path: &Path) -> Result<TreeSemilattice> {
    read_tsl(&read(path)?).with_context(|| format!("reading {}", path.display()))
}

fn graph(path: &Path) -> Result<SimpleGraph> {
    read_graph(&read(path)?).with_context(|| format!("reading {}", path.display()))
}

fn cotree(path: &Path) -> Result<Cotree> {
    read_cotree(&read(path)?).with_context(|| format!("reading {}", path.display()))
}

fn formula(text: &str, k: usize) -> Result<QfFormula> {
    if let Some(f) = named_formula(text) {
        return Ok(f);
    }
    Ok(parse_formula(text, infer_arity(text)?, k)?)
}

/// Largest `xN` index in a graph formula.
fn graph_arity(text: &str) -> usize {
    let b = text.as_bytes();
    let mut best = 1;
    for (i, _) in text.match_indices('x') {
        let digits: String = b[i + 1..].iter().take_while(|c| c.is_ascii_digit()).map(|&c| c as char).collect();
        if let Ok(n) = digits.parse::<usize>() {
            best = best.max(n);
        }
    }
    best
}

fn ok(text: String) -> Result<Report> {
    Ok(Report { text, ok: true })
}

pub fn run(cmd: &Command, g: &Global, st: Style) -> Result<Report> {
    let budget = g.budget;
    match cmd {
        Command::Validate { tree: path } => {
            let t = tree(path)?;
            let report = validate_axioms(&t);
            let mut items = vec![
                ("nodes", t.len().to_string()),
                ("colors", t.k().to_string()),
                ("triples checked", report.triples_checked.to_string()),
                ("exhaustive", report.exhaustive.to_string()),
            ];
            if let Some(v) = report.violation {
                items.push(("violation", v.to_string()));
            }
            items.push(("valid", report.holds().to_string()));
            Ok(Report { text: pairs(st.format, &items), ok: report.holds() })
        }

        Command::Pairing { tree: path, formula: f, mc } => {
            let t = tree(path)?;
            let phi = formula(f, t.k())?;
            match mc {
                None => ok(format!("{}\n", st.num(&stone_pairing_exact_with_budget(&t, &phi, budget)?))),
                Some(samples) => {
                    let e = stone_pairing_mc(&t, &phi, *samples, g.seed)?;
                    ok(pairs(
                        st.format,
                        &[
                            ("estimate", format!("{:.6}", e.estimate)),
                            ("stderr", format!("{:.6}", e.stderr)),
                            ("hits", e.hits.to_string()),
                            ("samples", e.samples.to_string()),
                        ],
                    ))
                }
            }
        }

        Command::Types { tree: path, p } => {
            let t = tree(path)?;
            let d = type_distribution_with_budget(&t, *p, budget)?;
            let mut table = Table::new(&["type", "probability"]);
            for (key, prob) in d.iter() {
                table.row(vec![key.to_string(), st.num(&prob)]);
            }
            ok(table.render(st.format))
        }

        Command::Distance { a, b, p, max_p } => {
            let (a, b) = (tree(a)?, tree(b)?);
            match p {
                Some(p) => ok(format!("{}\n", st.num(&qf_sup_distance_p_with_budget(&a, &b, *p, budget)?))),
                None => {
                    let d = dist_truncated(&a, &b, *max_p, budget)?;
                    let mut table = Table::new(&["p", "sup_p"]);
                    for (i, s) in d.per_arity.iter().enumerate() {
                        table.row(vec![(i + 1).to_string(), st.num(s)]);
                    }
                    let mut text = pairs(
                        st.format,
                        &[("lower", st.num(&d.lo)), ("upper", st.num(&d.hi)), ("arities", d.completed.to_string())],
                    );
                    text.push_str(&table.render(st.format));
                    ok(text)
                }
            }
        }

        Command::Partition { tree: path, eps } => {
            let t = tree(path)?;
            let p = eps_partition(&t, eps)?;
            checked_partition(&t, eps, &p)
        }

        Command::Refine { tree: path, partition, eps } => {
            let t = tree(path)?;
            let coarse = read_partition(&read(partition)?, &t)
                .with_context(|| format!("reading {}", partition.display()))?;
            if eps >= &coarse.epsilon {
                bail!(qftree_core::Error::Input(format!(
                    "refinement needs ε′ < ε, got {eps} and {}",
                    coarse.epsilon
                )));
            }
            let fine = refine_partition(&t, eps, &coarse)?;
            let mut r = checked_partition(&t, eps, &fine)?;
            if !fine.refines(&coarse) {
                r.ok = false;
                r.text.insert_str(0, "# not contained in the coarse partition\n");
            }
            Ok(r)
        }

        Command::Reduce { tree: path, eps } => {
            let t = tree(path)?;
            let r = standard_reduction(&t, &eps_partition(&t, eps)?)?;
            let report = verify_reduction(&r);
            let mut text = format!(
                "# target size {}, bound {}, violations {}\n",
                report.target_size,
                report.size_bound,
                report.violations.len()
            );
            for v in &report.violations {
                writeln!(text, "# violation: {v}").unwrap();
            }
            text.push_str(&write_reduction(&r));
            Ok(Report { text, ok: report.is_valid() })
        }

        Command::Tower { tree: path, schedule } => {
            let t = tree(path)?;
            let tower = build_tower(&t, schedule)?;
            let commutes = verify_tower(&tower);
            let sizes: Vec<String> = tower.levels.iter().map(|l| l.target.len().to_string()).collect();
            let mut text = format!("# level sizes {}, commutes {commutes}\n", sizes.join(" "));
            text.push_str(&write_tower(&tower));
            Ok(Report { text, ok: commutes })
        }

        Command::Sample { tree: path, n } => {
            let t = tree(path)?;
            let s = sample_structure(&t, *n, g.seed)?;
            ok(sample_text(&s))
        }

        Command::Uniformize { tree: path, n, c, formula: f } => {
            if *c == 0 {
                bail!(qftree_core::Error::Input("C must be at least 1".into()));
            }
            let t = tree(path)?;
            let s = sample_structure(&t, *n, g.seed)?;
            let u = uniformize(&s, *c)?;
            let mut text = format!("# chain length {}, nodes {}\n", u.chain_length, u.tree.len());
            let mut good = true;
            if let Some(f) = f {
                let phi = formula(f, t.k())?;
                let check = uniformization_error_check(&s, &u, &phi, budget)?;
                good = check.holds();
                writeln!(
                    text,
                    "# sampled {}, uniformized {}, gap {}, bound {}, holds {good}",
                    st.num(&check.lhs),
                    st.num(&check.rhs),
                    st.num(&check.gap()),
                    st.num(&check.bound)
                )
                .unwrap();
            }
            for (v, o) in u.origin.iter().enumerate() {
                writeln!(text, "# origin {v} {o} level {}", u.level[v]).unwrap();
            }
            text.push_str(&write_tsl(&u.tree));
            Ok(Report { text, ok: good })
        }

        Command::Concentration { tree: path, formula: f, eps, n, trials } => {
            let t = tree(path)?;
            let phi = formula(f, t.k())?;
            let r = concentration_experiment(&t, &phi, *n, *trials, eps, g.seed, budget)?;
            let text = pairs(
                st.format,
                &[
                    ("exact", st.num(&r.exact)),
                    ("trials", r.trials().to_string()),
                    ("exceedances", r.exceedances.to_string()),
                    ("rate", format!("{:.6}", r.rate)),
                    ("bound", format!("{:.6}", r.bound)),
                    ("slack", format!("{:.6}", r.slack)),
                    ("holds", r.holds().to_string()),
                ],
            );
            Ok(Report { text, ok: r.holds() })
        }

        Command::Interpret { cotree: path } => ok(write_graph(&interpret_cotree(&cotree(path)?))),

        Command::Translate { cotree: path, formula: f } => {
            let ct = cotree(path)?;
            let psi = parse_graph_formula(f, graph_arity(f))?;
            let (t, scheme) = encode_cotree_as_semilattice(&ct);
            let phi = translate_formula(&psi, &scheme);
            let lhs = graph_pairing(&interpret_cotree(&ct), &psi, budget)?;
            let rhs = stone_pairing_exact_with_budget(&t, &phi, budget)?;
            let agree = lhs == rhs;
            let text = pairs(
                st.format,
                &[
                    ("translated", phi.to_string()),
                    ("graph pairing", st.num(&lhs)),
                    ("tree pairing", st.num(&rhs)),
                    ("agree", agree.to_string()),
                ],
            );
            Ok(Report { text, ok: agree })
        }

        Command::Homdensity { f, g: target } => {
            ok(format!("{}\n", st.num(&hom_density(&graph(f)?, &graph(target)?, budget)?)))
        }

        Command::Induced { f, g: target } => {
            ok(format!("{}\n", induced_subgraph_check(&graph(f)?, &graph(target)?)))
        }

        Command::Pipeline { tree: path, eps } => pipeline(&tree(path)?, eps, budget, st),

        Command::Converge { generator, sizes, max_p } => converge(generator, sizes, *max_p, g, st),
    }
}

fn checked_partition(
    t: &TreeSemilattice,
    eps: &qftree_core::Rational,
    p: &qftree_core::EpsPartition,
) -> Result<Report> {
    let report = validate_partition(t, eps, p);
    let mut text = String::new();
    for v in &report.violations {
        writeln!(text, "# violation: {v}").unwrap();
    }
    text.push_str(&write_partition(p));
    Ok(Report { text, ok: report.is_valid() })
}

fn sample_text(s: &SampledStructure) -> String {
    let mut text = format!(
        "# draws {}, distinct {}, meet-only {}\n",
        s.draws,
        s.distinct_draws(),
        s.meet_only_count()
    );
    for (v, o) in s.origin.iter().enumerate() {
        writeln!(text, "# origin {v} {o} count {}", s.counts[v]).unwrap();
    }
    text.push_str(&write_tsl(&s.tree));
    text
}

fn pipeline(t: &TreeSemilattice, eps: &qftree_core::Rational, budget: u128, st: Style) -> Result<Report> {
    let p = eps_partition(t, eps)?;
    let r = standard_reduction(t, &p)?;
    let verified = verify_reduction(&r);
    let mut battery: Vec<(String, QfFormula)> = vec![("fig2".into(), QfFormula::incomparable_pair())];
    for arity in 1..=2 {
        battery.extend(enumerate_formulas(arity, 3, t.k()).into_iter().map(|f| (f.to_string(), f)));
    }
    let mut table = Table::new(&["formula", "arity", "source", "reduced", "gap", "bound", "holds"]);
    let mut all = verified.is_valid();
    for (name, phi) in &battery {
        let c = reduction_error_check(&r, phi, budget)?;
        all &= c.holds();
        table.row(vec![
            name.clone(),
            phi.arity.to_string(),
            st.num(&c.lhs),
            st.num(&c.rhs),
            st.num(&c.gap()),
            st.num(&c.bound),
            c.holds().to_string(),
        ]);
    }
    let mut text = String::new();
    writeln!(text, "# partition").unwrap();
    text.push_str(&write_partition(&p));
    writeln!(
        text,
        "# reduction: target size {}, bound {}, violations {}",
        verified.target_size,
        verified.size_bound,
        verified.violations.len()
    )
    .unwrap();
    text.push_str(&write_reduction(&r));
    writeln!(text, "# errors").unwrap();
    text.push_str(&table.render(st.format));
    Ok(Report { text, ok: all })
}

fn converge(generator: &str, sizes: &[usize], max_p: usize, g: &Global, st: Style) -> Result<Report> {
    if sizes.len() < 2 {
        bail!(qftree_core::Error::Input("at least two sizes are needed".into()));
    }
    let parts: Vec<&str> = generator.splitn(3, ':').collect();
    let members: Vec<TreeSemilattice> = match parts.as_slice() {
        ["chain"] => sizes.iter().map(|&n| TreeSemilattice::chain(n.max(1))).collect(),
        ["star"] => sizes.iter().map(|&n| TreeSemilattice::star(n)).collect(),
        ["constant", file] => {
            let t = tree(Path::new(file))?;
            sizes.iter().map(|_| t.clone()).collect()
        }
        ["uniformize", file, n] => {
            let n: usize = n
                .parse()
                .map_err(|_| qftree_core::Error::Input(format!("bad sample size `{n}`")))?;
            let s = sample_structure(&tree(Path::new(file))?, n, g.seed)?;
            sizes.iter().map(|&c| uniformize(&s, c.max(1)).map(|u| u.tree)).collect::<Result<_, _>>()?
        }
        _ => return Err(anyhow!(qftree_core::Error::Input(format!("unknown generator `{generator}`")))),
    };
    let mut table = Table::new(&["from", "to", "lower", "upper", "arities"]);
    for (i, w) in members.windows(2).enumerate() {
        let d = dist_truncated(&w[0], &w[1], max_p, g.budget)?;
        table.row(vec![
            sizes[i].to_string(),
            sizes[i + 1].to_string(),
            st.num(&d.lo),
            st.num(&d.hi),
            d.completed.to_string(),
        ]);
    }
    ok(table.render(st.format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_arity_reads_largest_index() {
        assert_eq!(graph_arity("E(x1, x3) & x2 = x1"), 3);
        assert_eq!(graph_arity("x1 = x1"), 1);
    }
}
