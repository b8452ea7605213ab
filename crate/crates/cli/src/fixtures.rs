//! Golden fixtures, regenerated from scratch on demand.
//!
//! Everything in these files is recomputed through the library entry points,
//! so a fixture refresh re-derives every expected value instead of copying
//! stale constants around.

use crate::manifest::{atomic_write, csv_text};
use limsup_core::dimension::{
    closed_form, mtpr_lower_bound, select_exponents, ClosedFormCase, DimensionProblem, Setting,
};
use limsup_core::exact::{rat, Dyadic, Monomial, Rat};
use limsup_core::rings::{
    count_shell, hurwitz_units, AmbientPoint, CountMode, PointMatrix, RingDescriptor,
};
use limsup_core::solver::{solve, LinearFormSystem, Strategy};
use std::io;
use std::path::{Path, PathBuf};

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn emit_fixture_suite(dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> io::Result<()> {
        let path = dir.join(name);
        atomic_write(&path, &csv_text(header, &rows))?;
        written.push(path);
        Ok(())
    };

    // flagship closed forms
    let cases: Vec<(Setting, Vec<Rat>)> = vec![
        (Setting::RealLinearForms { m: 1, n: 1 }, vec![rat(2, 1)]),
        (Setting::TwoDimSimultaneous, vec![rat(3, 1), rat(2, 1)]),
        (Setting::TwoDimSimultaneous, vec![rat(2, 1), rat(1, 1)]),
        (Setting::Padic { m: 2, n: 1 }, vec![rat(4, 1)]),
        (Setting::Complex { m: 1, n: 1 }, vec![rat(2, 1)]),
        (Setting::Complex { m: 1, n: 1 }, vec![rat(3, 1)]),
        (Setting::Quaternion { m: 1, n: 1 }, vec![rat(3, 1)]),
        (Setting::Laurent { m: 1, n: 2 }, vec![rat(3, 1), rat(2, 1)]),
    ];
    let mut rows = Vec::new();
    for (setting, tau) in cases {
        let case = ClosedFormCase::new(setting, tau.clone()).unwrap();
        let cf = closed_form(&case).unwrap();
        let (m, n) = setting.dims();
        rows.push(vec![
            setting.name().to_string(),
            m.to_string(),
            n.to_string(),
            join(tau.iter()),
            cf.value.to_string(),
            join(cf.argmin.iter()),
        ]);
    }
    emit("closed_forms.csv", &["setting", "m", "n", "tau", "value", "argmin"], rows)?;

    // exponent selections achieving the closed forms
    let mut rows = Vec::new();
    for (setting, tau) in [
        (Setting::Padic { m: 2, n: 1 }, vec![rat(4, 1)]),
        (Setting::Padic { m: 2, n: 2 }, vec![rat(5, 1), rat(3, 2)]),
        (Setting::Complex { m: 1, n: 2 }, vec![rat(3, 1), rat(2, 1)]),
    ] {
        let case = ClosedFormCase::new(setting, tau.clone()).unwrap();
        let sel = select_exponents(&case).unwrap();
        let lb = mtpr_lower_bound(&sel.to_problem()).unwrap();
        rows.push(vec![
            setting.name().to_string(),
            join(tau.iter()),
            format!("{:?}", sel.case_tag),
            join(sel.a.iter()),
            join(sel.t.iter()),
            lb.value.to_string(),
        ]);
    }
    emit("selections.csv", &["setting", "tau", "case", "a", "t", "value"], rows)?;

    // transference formula hand examples
    let probs = [
        (vec![rat(1, 1); 2], rat(0, 1), vec![rat(3, 2); 2], vec![rat(3, 2), rat(1, 2)]),
        (vec![rat(2, 1)], rat(1, 2), vec![rat(3, 1)], vec![rat(1, 1)]),
    ];
    let mut rows = Vec::new();
    for (delta, kappa, a, t) in probs {
        let prob = DimensionProblem { delta: delta.clone(), kappa, a: a.clone(), t: t.clone() };
        let r = mtpr_lower_bound(&prob).unwrap();
        rows.push(vec![
            join(delta.iter()),
            kappa.to_string(),
            join(a.iter()),
            join(t.iter()),
            r.value.to_string(),
            join(r.minimizers.iter().map(|c| c.level)),
        ]);
    }
    emit("mtpr_examples.csv", &["delta", "kappa", "a", "t", "value", "min_levels"], rows)?;

    // shell counts across rings
    let mut rows = Vec::new();
    for q in 1..=5i64 {
        for m in 1..=2usize {
            let c = count_shell(&RingDescriptor::complex(), m, rat(q, 1), CountMode::Exact)
                .unwrap();
            rows.push(vec!["complex".into(), m.to_string(), q.to_string(), c.to_string()]);
        }
    }
    for t in [2u64, 3] {
        for r in 0..=3u32 {
            for m in 1..=2usize {
                let h = Rat::from_integer(t.pow(r) as i64);
                let c = count_shell(&RingDescriptor::laurent(t, 8), m, h, CountMode::Exact)
                    .unwrap();
                rows.push(vec![
                    format!("t{t}"),
                    m.to_string(),
                    t.pow(r).to_string(),
                    c.to_string(),
                ]);
            }
        }
    }
    for s2 in 1..=4i64 {
        let c = count_shell(&RingDescriptor::quaternion(), 1, Rat::new(s2, 2), CountMode::Exact)
            .unwrap();
        rows.push(vec!["quaternion".into(), "1".into(), Rat::new(s2, 2).to_string(), c.to_string()]);
    }
    emit("shell_counts.csv", &["ring", "m", "height", "count"], rows)?;

    // the 24 units
    let rows: Vec<Vec<String>> = hurwitz_units()
        .iter()
        .map(|u| {
            vec![
                join(u.d.iter()),
                u.norm2().to_string(),
            ]
        })
        .collect();
    emit("hurwitz_units.csv", &["doubled_coords", "norm2"], rows)?;

    // the golden-ratio solver record under both strategies
    let phi = Dyadic::new(6_949_350_031, 32);
    let matrix = PointMatrix { m: 1, n: 1, entries: vec![AmbientPoint::Real(phi)] };
    let sys = LinearFormSystem::new(
        RingDescriptor::real(),
        matrix,
        vec![Monomial::from_rat(&rat(1, 5))],
        vec![rat(5, 1)],
    )
    .unwrap();
    let mut rows = Vec::new();
    for (name, strat) in [("first", Strategy::FirstFound), ("min_error", Strategy::MinError)] {
        let rec = solve(&sys, strat, None).unwrap();
        rows.push(vec![
            name.to_string(),
            join(rec.q.iter()),
            join(rec.p.iter()),
            join(rec.errors.iter().map(|e| e.value)),
            rec.height.to_string(),
        ]);
    }
    emit("golden_solve.csv", &["strategy", "q", "p", "errors", "height"], rows)?;

    Ok(written)
}
