use std::fs;
use std::path::PathBuf;

use mgl_core::cancellation::{self, Lambda, PsDimOptions, Presentation};
use mgl_core::grigorchuk::{self, GrigWord, MembershipNode, OracleSeq};
use mgl_core::lattice;
use mgl_core::metric::{self, dim_sequence, BallFingerprint, Window};
use mgl_core::one_relator::{self, PowerRelator};
use mgl_core::word::{self, FreeAlphabet};
use mgl_core::{Budget, Word};
use serde_json::json;

use crate::table::{plotdata, Bounds, Cell, Table};
use crate::{CliError, Outcome, RankRadius, Relators};

fn words_in(m: usize, texts: &[String]) -> Result<Vec<Word>, CliError> {
    let a = FreeAlphabet::new(m)?;
    Ok(texts.iter().map(|t| Word::parse_in(&a, t)).collect::<Result<_, _>>()?)
}

fn lambda(text: &str) -> Result<Lambda, CliError> {
    Ok(text.parse()?)
}

fn presentation(rel: &Relators) -> Result<Presentation, CliError> {
    let rs = words_in(rel.m, &rel.relators)?;
    match rel.q {
        Some(q) => {
            let [root] = rs.as_slice() else {
                return Err(CliError::Usage("one-relator mode takes exactly one -r root".into()));
            };
            Ok(Presentation::one_relator(rel.m, root.clone(), q)?)
        }
        None => Ok(Presentation::small_cancellation(rel.m, rs, lambda(&rel.lambda)?)?),
    }
}

fn single(table: Table) -> Outcome {
    Outcome { tables: vec![table], ..Default::default() }
}

pub fn ball(a: &RankRadius, budget: &Budget) -> Result<Outcome, CliError> {
    FreeAlphabet::new(a.m)?;
    let mut t = Table::new("ball", &["n", "beta"]);
    let enumerated = word::enumerate_ball(a.m, a.n, budget)?;
    for r in 0..=a.n {
        let count = word::ball_count(a.m, r).ok_or(mgl_core::Error::Overflow("ball size"))?;
        if a.m >= 2 {
            debug_assert_eq!(word::ball_size(a.m, r)?, count);
        }
        assert_eq!(enumerated.beta(r) as u128, count);
        t.push(vec![r.into(), count.into()]);
    }
    Ok(single(t))
}

pub fn cyc(a: &RankRadius, list: bool, budget: &Budget) -> Result<Outcome, CliError> {
    FreeAlphabet::new(a.m)?;
    if list {
        let mut t = Table::new("cyc_words", &["word"]);
        for w in word::enumerate_cyc(a.m, a.n, budget)? {
            t.push(vec![w.to_string().into()]);
        }
        return Ok(single(t));
    }
    let mut t = Table::new("cyc", &["n", "cyc", "ratio"]);
    let branch = (2 * a.m - 1) as f64;
    for n in 1..=a.n {
        let c = word::count_cyc(a.m, n, budget)?;
        t.push(vec![n.into(), c.into(), (c as f64 / branch.powi(n as i32)).into()]);
    }
    Ok(single(t))
}

pub fn check_cprime(rel: &Relators) -> Result<Outcome, CliError> {
    let rs = words_in(rel.m, &rel.relators)?;
    let l = lambda(&rel.lambda)?;
    let report = cancellation::check_c_prime(&rs, l)?;
    let mut t = Table::new("cprime", &["lambda", "min_length", "longest_piece", "piece", "holds"]);
    let piece = report.longest.as_ref();
    t.push(vec![
        l.to_string().into(),
        report.min_len.into(),
        piece.map_or(0, |p| p.len()).into(),
        piece.map(|p| p.word.to_string()).into(),
        report.holds.into(),
    ]);
    Ok(single(t))
}

pub fn dehn(rel: &Relators, word: &str) -> Result<Outcome, CliError> {
    let w = Word::parse_in(&FreeAlphabet::new(rel.m)?, word)?;
    let red = match rel.q {
        Some(q) => {
            let rs = words_in(rel.m, &rel.relators)?;
            let [root] = rs.as_slice() else {
                return Err(CliError::Usage("one-relator mode takes exactly one -r root".into()));
            };
            one_relator::newman_member(&w, &PowerRelator::new(root.clone(), q)?)
        }
        None => cancellation::dehn_member(&w, &presentation(rel)?)?,
    };
    let mut verdict = Table::new("dehn", &["word", "output", "steps", "verdict"]);
    verdict.push(vec![
        w.to_string().into(),
        red.output.to_string().into(),
        red.steps.len().into(),
        if red.accepted() { "accepted" } else { "rejected" }.into(),
    ]);
    let mut trace = Table::new("trace", &["step", "position", "relator", "inverse", "offset", "length"]);
    for (i, s) in red.steps.iter().enumerate() {
        trace.push(vec![
            i.into(),
            s.position.into(),
            s.relator.into(),
            s.inverse.into(),
            s.offset.into(),
            s.length.into(),
        ]);
    }
    let json = json!({
        "input": w.to_string(),
        "output": red.output.to_string(),
        "accepted": red.accepted(),
        "steps": red.steps,
    });
    Ok(Outcome {
        tables: vec![verdict, trace],
        files: vec![("trace.json".into(), serde_json::to_string_pretty(&json).expect("json") + "\n")],
        ..Default::default()
    })
}

pub fn fingerprint(rel: &Relators, n: u32, budget: &Budget) -> Result<Outcome, CliError> {
    let p = presentation(rel)?;
    let f = cancellation::closure_fingerprint(&p, n, budget)?;
    let mut t = Table::new("fingerprint", &["m", "n", "beta", "members", "hex"]);
    t.push(vec![rel.m.into(), n.into(), f.len().into(), f.count_ones().into(), f.to_hex().into()]);
    Ok(Outcome {
        tables: vec![t],
        files: vec![("fingerprints.txt".into(), metric::write_fingerprints(&[f])?)],
        ..Default::default()
    })
}

fn dim_tables(name: &str, counts: &[(u32, f64)], bounds: &Bounds) -> Result<(Table, Table), CliError> {
    let mut summary = Table::new(&format!("{name}_summary"), &["window_start", "liminf", "limsup", "lower_line", "upper_line"]);
    let empirical: Vec<(u32, f64)> = counts
        .iter()
        .filter(|(n, c)| *n > 0 && *c > 0.0)
        .map(|&(n, c)| (n, c.log2() / n as f64))
        .collect();
    let line = |v: &[(u32, f64)]| v.first().map(|p| p.1);
    if counts.is_empty() {
        summary.push(vec![Cell::Empty, Cell::Empty, Cell::Empty, line(&bounds.lower).into(), line(&bounds.upper).into()]);
    } else {
        let d = dim_sequence(counts, Window::TopHalf)?;
        summary.push(vec![
            d.rows[d.window_start].n.into(),
            d.liminf.into(),
            d.limsup.into(),
            line(&bounds.lower).into(),
            line(&bounds.upper).into(),
        ]);
    }
    Ok((summary, plotdata(&empirical, bounds)))
}

pub fn ps_dim(
    m: usize,
    k: u32,
    lambda_text: &str,
    n: u32,
    seed: Option<u64>,
    samples: u64,
    budget: &Budget,
) -> Result<Outcome, CliError> {
    let l = lambda(lambda_text)?;
    let r = cancellation::ps_dimension_experiment(m, k, l, 1..=n, budget, PsDimOptions { seed, samples })?;
    let mut t = Table::new(
        "ps_dim",
        &["n", "ps", "ps_estimate", "ps_stderr", "lower_certificate", "distinct_closures", "covering", "N", "s_n"],
    );
    let mut counts = Vec::new();
    for row in &r.rows {
        t.push(vec![
            row.n.into(),
            row.ps_count.into(),
            row.ps_sample.as_ref().map(|s| s.estimate).into(),
            row.ps_sample.as_ref().map(|s| s.std_error).into(),
            row.lower_certificate.into(),
            row.fingerprint_count.into(),
            row.covering.into(),
            row.count.into(),
            row.s.into(),
        ]);
        counts.push((row.n, row.count));
    }
    let bounds = Bounds {
        lower: r.rows.iter().map(|row| (row.n, r.lower_line)).collect(),
        upper: r.rows.iter().map(|row| (row.n, r.upper_line)).collect(),
    };
    let (summary, plot) = dim_tables("ps_dim", &counts, &bounds)?;
    Ok(Outcome { tables: vec![t, summary], plot: Some(plot), seeds: seed.into_iter().collect(), files: vec![] })
}

pub fn ur_dim(m: usize, q: u32, n: u32, budget: &Budget) -> Result<Outcome, CliError> {
    let r = one_relator::ur_dimension_experiment(m, q, 1..=n, budget)?;
    let mut t = Table::new(
        "ur_dim",
        &["n", "root_length", "cyc", "lower_bound", "root_classes", "covering", "N", "s_n"],
    );
    let mut counts = Vec::new();
    for row in &r.rows {
        t.push(vec![
            row.n.into(),
            row.root_len.into(),
            row.cyc_count.into(),
            row.lower_bound.into(),
            row.class_count.into(),
            row.covering.into(),
            row.count.into(),
            row.s.into(),
        ]);
        if let Some(c) = row.count {
            counts.push((row.n, c));
        }
    }
    let bounds = Bounds {
        lower: r.rows.iter().map(|row| (row.n, r.lower_line)).collect(),
        upper: r.rows.iter().map(|row| (row.n, r.upper_line)).collect(),
    };
    let (summary, plot) = dim_tables("ur_dim", &counts, &bounds)?;
    Ok(Outcome { tables: vec![t, summary], plot: Some(plot), ..Default::default() })
}

fn oracle(text: &str) -> Result<OracleSeq, CliError> {
    Ok(text.parse()?)
}

fn tree_json(node: &MembershipNode) -> serde_json::Value {
    json!({
        "word": node.word.to_string(),
        "depth": node.depth,
        "rule": format!("{:?}", node.rule),
        "accepted": node.accepted,
        "children": node.children.iter().map(tree_json).collect::<Vec<_>>(),
    })
}

pub fn grig_member(word: &str, omega: &str) -> Result<Outcome, CliError> {
    let w: GrigWord = word.parse()?;
    let o = oracle(omega)?;
    let v = grigorchuk::member(&w, &o);
    let mut t = Table::new("grig_member", &["word", "omega", "reduced", "depth", "nodes", "verdict"]);
    t.push(vec![
        w.to_string().into(),
        o.to_string().into(),
        grigorchuk::gamma_reduce(&w).to_string().into(),
        v.tree.height().into(),
        v.tree.size().into(),
        if v.accepted { "accepted" } else { "rejected" }.into(),
    ]);
    let tree = serde_json::to_string_pretty(&tree_json(&v.tree)).expect("json") + "\n";
    Ok(Outcome { tables: vec![t], files: vec![("tree.json".into(), tree)], ..Default::default() })
}

pub fn grig_fingerprint(omega: &str, n: u32, budget: &Budget) -> Result<Outcome, CliError> {
    let o = oracle(omega)?;
    let f = grigorchuk::fingerprint_s(&o, n, budget)?;
    let mut t = Table::new("grig_fingerprint", &["omega", "n", "beta", "members", "hex"]);
    t.push(vec![o.to_string().into(), n.into(), f.len().into(), f.count_ones().into(), f.to_hex().into()]);
    Ok(Outcome {
        tables: vec![t],
        files: vec![("fingerprints.txt".into(), metric::write_fingerprints(&[f])?)],
        ..Default::default()
    })
}

pub fn grig_separation(omegas: &[String], n: u32, budget: &Budget) -> Result<Outcome, CliError> {
    let [a, b] = omegas else {
        return Err(CliError::Usage("grig-prop62 takes exactly two --omega values".into()));
    };
    let (a, b) = (oracle(a)?, oracle(b)?);
    let r = grigorchuk::verify_separation(&a, &b, n, budget)?;
    let mut t = Table::new(
        "grig_separation",
        &["omega1", "omega2", "n", "prefixes_agree", "near_radius", "equal_near", "far_radius", "separating_word", "distance", "consistent"],
    );
    t.push(vec![
        a.to_string().into(),
        b.to_string().into(),
        n.into(),
        r.prefixes_agree.into(),
        r.near_radius.into(),
        r.equal_near.into(),
        r.far_radius.into(),
        r.separating_word.map(|w| w.to_string()).into(),
        r.distance.map(|d| d.to_string()).into(),
        r.consistent.into(),
    ]);
    Ok(single(t))
}

pub fn zm_cover(a: &RankRadius, budget: &Budget) -> Result<Outcome, CliError> {
    let mut t = Table::new("zm_cover", &["n", "N"]);
    for n in 0..=a.n {
        t.push(vec![n.into(), lattice::covering_number_zm(a.m, n, budget)?.into()]);
    }
    Ok(single(t))
}

pub fn zm_dim(a: &RankRadius, budget: &Budget) -> Result<Outcome, CliError> {
    let r = lattice::zm_dimension_experiment(a.m, 1..=a.n, budget)?;
    let mut t = Table::new(
        "zm_dim",
        &["n", "ball", "volume_ratio", "exact", "subset_bound", "power_bound", "N", "s_n"],
    );
    let mut counts = Vec::new();
    for row in &r.rows {
        t.push(vec![
            row.n.into(),
            row.ball.into(),
            row.volume_ratio.into(),
            row.exact.into(),
            row.subset_bound.into(),
            row.power_bound.into(),
            row.count.into(),
            row.s.into(),
        ]);
        counts.push((row.n, row.count));
    }
    let bounds = Bounds {
        lower: r.rows.iter().map(|row| (row.n, 0.0)).collect(),
        upper: r.rows.iter().map(|row| (row.n, row.power_bound.log2() / row.n as f64)).collect(),
    };
    let (summary, plot) = dim_tables("zm_dim", &counts, &bounds)?;
    Ok(Outcome { tables: vec![t, summary], plot: Some(plot), ..Default::default() })
}

pub fn distance(files: &[PathBuf]) -> Result<Outcome, CliError> {
    let mut family: Vec<BallFingerprint> = Vec::new();
    for f in files {
        family.extend(metric::read_fingerprints(&fs::read_to_string(f)?)?);
    }
    let mut t = Table::new("distance", &["i", "j", "valuation", "distance"]);
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let v = metric::valuation(&family[i], &family[j])?;
            let d = metric::distance(&family[i], &family[j])?;
            let v = match v {
                metric::Valuation::Exact(e) => e.to_string(),
                metric::Valuation::AtLeast(p) => format!(">={p}"),
            };
            t.push(vec![i.into(), j.into(), v.into(), d.to_string().into()]);
        }
    }
    let mut c = Table::new("covering", &["n", "covering", "packing"]);
    if let Some(first) = family.first() {
        for n in 0..=first.radius() {
            c.push(vec![n.into(), metric::covering_number(&family, n)?.into(), metric::packing_number(&family, n)?.into()]);
        }
    }
    Ok(Outcome { tables: vec![t, c], ..Default::default() })
}

pub fn growth(a: &RankRadius) -> Result<Outcome, CliError> {
    let mut t = Table::new("growth", &["n", "beta", "sigma", "beta_over_n", "root"]);
    for row in metric::growth_stats(a.m, a.n)? {
        t.push(vec![row.n.into(), row.beta.into(), row.sigma.into(), row.beta_over_n.into(), row.root.into()]);
    }
    Ok(single(t))
}
