//! Subcommand implementations. Each returns a report; the caller renders it.

use std::collections::BTreeMap;

use num_rational::Rational64;
use superfield::bundle::{
    closed_form_matrix, cocycle_check, extension_class, extension_param, gl11_build, gl11_dual_witness,
    gl11_from_module, gl11_parity_witness, gl11_relations, intertwines, mismatched_entries, module_catalog,
    module_names, sample_change, transition_matrix, FiniteAutModule, GL11Kind, GL11Rep, ModuleParams,
};
use superfield::derlie::{closed_forms, exp_coordinates, round_trip, verify_family, Family};
use superfield::disk::{
    cocycle_sides, dual_transition, n2_from_n1, schwarzian_n2, superprojective_sample, CoordinateChange, Level,
};
use superfield::lca::catalog::{catalog, catalog_names, CatalogParams};
use superfield::lca::ope::ope_distribution;
use superfield::lca::physics::{check_table, expected_bracket, relabel_modes};
use superfield::lca::{check_mode_consistency, LCAPresentation, ModeCalc};
use superfield::random::Sampler;
use superfield::series::delta::delta_expand;
use superfield::supermatrix::SuperMatrix;
use superfield::{Chart, Derivation, Dir, Scalar, SuperSeries, Variant};

use crate::error::{CliError, Result};
use crate::eval::Eval;
use crate::parse::{parse, parse_change, parse_expr, DefValue, ParsedDocument};
use crate::report::{change_text, first_term, series_text, Report};
use crate::{report_for, AlgebraArgs, ChangeArgs, Command, LevelArg, SessionConfig};

pub fn run(cmd: &Command, cfg: &SessionConfig) -> Result<Report> {
    let mut rep = report_for(cmd);
    match cmd {
        Command::CheckAlgebra { alg, window, table } => check_algebra(&mut rep, cfg, alg, *window, table.as_deref())?,
        Command::ModeBracket { x, y, file, catalog, algebra, params, table } => {
            let alg = AlgebraArgs { file: file.clone(), catalog: catalog.clone(), algebra: algebra.clone(), params: params.clone() };
            mode_bracket(&mut rep, cfg, &alg, x, y, table.as_deref())?
        }
        Command::OpeCheck { alg, window, pair } => ope_check(&mut rep, cfg, alg, *window, pair.as_deref())?,
        Command::Catalog { list, name, params } => catalog_cmd(&mut rep, cfg, *list, name.as_deref(), params)?,
        Command::Schwarzian(c) => {
            let rho = Inputs::load(c, cfg)?.change(c.change.as_deref(), 0, false)?;
            rep.series("schwarzian", &rho.schwarzian()?);
        }
        Command::Schwarzian2(c) => {
            let rho = Inputs::load(c, cfg)?.change(c.change.as_deref(), 0, true)?;
            rep.series("schwarzian2", &schwarzian_n2(&rho)?);
        }
        Command::Compose { c, with } => {
            let inp = Inputs::load(c, cfg)?;
            let a = inp.change(c.change.as_deref(), 0, false)?;
            let b = inp.change(with.as_deref(), 1, false)?;
            let ab = a.compose(&b)?;
            rep.values.insert("composite".into(), (change_text(&ab), ab.to_string()));
        }
        Command::Localize { c, with } => {
            let inp = Inputs::load(c, cfg)?;
            let a = inp.change(c.change.as_deref(), 0, false)?;
            let l = a.localize();
            rep.series("F_Z", &l.f);
            for (i, p) in l.psi.iter().enumerate() {
                let key = if l.psi.len() == 1 { "Psi_Z".to_string() } else { format!("Psi{}_Z", i + 1) };
                rep.series(&key, p);
            }
            if let Some(w) = with {
                let b = inp.change(Some(w), 1, false)?;
                let (x, y) = cocycle_sides(&a, &b)?;
                rep.vanishes("cocycle.F", &x.f.sub(&y.f));
                for (i, (p, q)) in x.psi.iter().zip(&y.psi).enumerate() {
                    rep.vanishes(&format!("cocycle.Psi{}", i + 1), &p.sub(q));
                }
            }
        }
        Command::CheckSc { c, level } => {
            let (lv, complex) = match level {
                LevelArg::N1 => (Level::N1, false),
                LevelArg::N2 => (Level::N2, false),
                LevelArg::N2o => (Level::N2Oriented, true),
            };
            let rho = Inputs::load(c, cfg)?.change(c.change.as_deref(), 0, complex)?;
            let v = rho.superconformal(lv)?;
            for (name, r) in &v.residuals {
                rep.vanishes(&format!("residual.{}", name), r);
            }
            if v.residuals.is_empty() {
                rep.check("superconformal", v.holds, "");
            }
        }
        Command::Dual(c) => {
            let rho = Inputs::load(c, cfg)?.change(c.change.as_deref(), 0, false)?;
            let d = dual_transition(&rho)?;
            rep.values.insert("dual".into(), (change_text(&d), d.to_string()));
        }
        Command::N2lift(c) => {
            let rho = Inputs::load(c, cfg)?.change(c.change.as_deref(), 0, false)?;
            let (m, s) = n2_from_n1(&rho)?;
            rep.series("m", &m);
            rep.series("s", &s);
        }
        Command::Sdet(c) => {
            let rho = Inputs::load(c, cfg)?.change(c.change.as_deref(), 0, false)?;
            let sd = rho.jacobian().sdet()?;
            rep.series("sdet", &sd);
            if rho.n() == 1 && rho.is_superconformal(Level::N1) {
                let d = |x: &SuperSeries| x.derive(Derivation::D(1));
                let want = d(&d(&rho.f)?.div(&d(&rho.psi[0])?)?)?;
                rep.vanishes("sdet = D(DF/DPsi)", &sd.sub(&want));
            }
        }
        Command::ExpCoords { c, family, order, verify } => {
            let fam = cli_family(family)?;
            let inp = Inputs::load(c, cfg)?;
            let rho = inp.change_with(c.change.as_deref(), 0, fam.chart().complex, Some(family_variant(fam)))?;
            let coords = exp_coordinates(&rho, fam, *order)?;
            for (name, v) in &coords.values {
                rep.series(name, v);
            }
            if *verify {
                for (name, want) in closed_forms(&rho, fam)? {
                    match coords.get(&name) {
                        Some(g) => rep.vanishes(&format!("closed_form.{}", name), &g.sub(&want)),
                        None => rep.check(&format!("closed_form.{}", name), false, "not solved for"),
                    }
                }
                rep.check("round_trip", round_trip(&rho, &coords)?, "");
            }
        }
        Command::VerifyFamily { family, window } => {
            let fam = cli_family(family)?;
            let r = verify_family(fam, *window);
            rep.value("checked", r.checked);
            let detail = r
                .mismatches
                .first()
                .map(|m| format!("{} of {} differ, first {}: got {}, expected {}", r.mismatches.len(), r.checked, m.lhs, m.got, m.expected))
                .unwrap_or_default();
            rep.check(&format!("brackets.{}", fam), r.mismatches.is_empty() && r.checked > 0, detail);
        }
        Command::Transition { c, module, verify, cocycle, params } => {
            let p = module_params(params, cfg)?;
            let m = module_catalog(module, &p)?;
            let inp = Inputs::load(c, cfg)?;
            let complex = m.family.chart().complex;
            let v = Some(family_variant(m.family));
            let rho = inp.change_with(c.change.as_deref(), 0, complex, v)?;
            let t = transition_matrix(&m, &rho)?;
            rep.series_matrix("M", &t);
            if *verify {
                let want = closed_form_matrix(&m, &rho, &p)?;
                let off = mismatched_entries(&t, &want);
                rep.check("closed_form", off.is_empty(), cell_detail(&t, &want, &off));
            }
            if let Some(other) = cocycle {
                let tau = inp.change_with(Some(other), 1, complex, v)?;
                let r = cocycle_check(&m, &rho, &tau)?;
                let cells: Vec<String> = r.mismatches.iter().map(|(i, j)| format!("({},{})", i + 1, j + 1)).collect();
                rep.check("cocycle", r.holds, if r.holds { String::new() } else { format!("entries {}", cells.join(" ")) });
            }
        }
        Command::ExtensionClass { module, param } => {
            let want = extension_param(module)?;
            let (name, value) = param
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--param takes NAME=VALUE, got {}", param)))?;
            if name.trim() != want {
                return Err(CliError::Config(format!("{} is parametrised by {}, not {}", module, want, name.trim())));
            }
            let q = Eval::new(None, 0)
                .scalar(&parse_expr(value)?)?
                .as_qi()
                .ok_or_else(|| CliError::Config(format!("{} must be a number", want)))?;
            let v = extension_class(module, &q, cfg.trunc)?;
            rep.value("module", &v.module);
            rep.value("param", format!("{} = {}", v.param, superfield::scalar::fmt_qi(&v.value)));
            rep.value("split", v.split);
            for (i, j, s) in &v.symbolic {
                rep.series(&format!("entry.{}.{}", i + 1, j + 1), s);
            }
            if let Some((i, j, s)) = &v.witness {
                rep.value("witness", format!("({},{}) = {}", i + 1, j + 1, series_text(s)));
            }
        }
        Command::Gl11 { rep: r, dual, shift, module, block } => gl11_cmd(&mut rep, r.as_deref(), *dual, *shift, module.as_deref(), block)?,
        Command::Selftest { closed_forms } => selftest(&mut rep, cfg, *closed_forms),
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// inputs

fn read_source(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(|e| CliError::Io(format!("stdin: {}", e)))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {}", path, e)))
    }
}

fn load_doc(file: Option<&str>) -> Result<Option<ParsedDocument>> {
    file.map(|f| parse(&read_source(f)?)).transpose()
}

struct Inputs<'a> {
    doc: Option<ParsedDocument>,
    cfg: &'a SessionConfig,
}

impl<'a> Inputs<'a> {
    fn load(c: &ChangeArgs, cfg: &'a SessionConfig) -> Result<Inputs<'a>> {
        Ok(Inputs { doc: load_doc(c.file.as_deref())?, cfg })
    }

    fn change(&self, which: Option<&str>, nth: usize, complex: bool) -> Result<CoordinateChange> {
        self.change_with(which, nth, complex, None)
    }

    /// `which` names a change in the file or is inline text; without it the
    /// `nth` change of the file is used.
    fn change_with(&self, which: Option<&str>, nth: usize, complex: bool, force: Option<Variant>) -> Result<CoordinateChange> {
        let inline;
        let spec = match which {
            Some(w) => match self.doc.as_ref().and_then(|d| d.def(w)) {
                Some(d) => match &d.value {
                    DefValue::Change(c) => c,
                    DefValue::Expr(_) => return Err(CliError::Config(format!("{} is not a change", w))),
                },
                None if w.chars().all(|c| c.is_alphanumeric() || c == '_') => {
                    return Err(CliError::Config(format!("no change named {}", w)));
                }
                None => {
                    inline = parse_change(w)?;
                    &inline
                }
            },
            None => {
                let doc = self.doc.as_ref().ok_or_else(|| CliError::Config("no input file and no --change".into()))?;
                let names = doc.changes();
                let name = names
                    .get(nth)
                    .ok_or_else(|| CliError::Config(format!("the input defines {} change(s), {} needed", names.len(), nth + 1)))?;
                match &doc.def(name).unwrap().value {
                    DefValue::Change(c) => c,
                    DefValue::Expr(_) => unreachable!(),
                }
            }
        };
        let ev = Eval::new(self.doc.as_ref(), self.cfg.grassmann);
        let mut spec = spec.clone();
        if let Some(v) = force {
            if spec.variant.is_some_and(|x| x != v) {
                return Err(CliError::Config(format!("this family needs the {} variant", v)));
            }
            spec.variant = Some(v);
        }
        let rho = ev.change(&spec, self.cfg.trunc, complex, self.cfg.variant)?;
        if let Some(n) = self.cfg.n {
            if n != rho.n() {
                return Err(CliError::Config(format!("--n {} but the change has N = {}", n, rho.n())));
            }
        }
        Ok(rho)
    }
}

/// Parameter assignments `name=value` evaluated as constants.
fn param_map(params: &[String], grassmann: u32) -> Result<BTreeMap<String, Scalar>> {
    let mut out = BTreeMap::new();
    for p in params {
        let (k, v) = p.split_once('=').ok_or_else(|| CliError::Config(format!("--param takes NAME=VALUE, got {}", p)))?;
        let val = Eval::new(None, grassmann).scalar(&parse_expr(v)?)?;
        if out.insert(k.trim().to_string(), val).is_some() {
            return Err(CliError::Config(format!("parameter {} given twice", k.trim())));
        }
    }
    Ok(out)
}

fn take_params(params: &[String], cfg: &SessionConfig, allowed: &[&str]) -> Result<(Scalar, Scalar)> {
    let mut map = param_map(params, cfg.grassmann)?;
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Config(format!("unknown parameter {} (expected one of {})", k, allowed.join(", "))));
    }
    let c = map.remove("c").unwrap_or_else(|| Scalar::param("c"));
    let m = map.remove("m").unwrap_or_else(|| Scalar::param("m"));
    Ok((c, m))
}

fn module_params(params: &[String], cfg: &SessionConfig) -> Result<ModuleParams> {
    let (c, m) = take_params(params, cfg, &["c", "m"])?;
    Ok(ModuleParams { m, c })
}

fn load_algebra(a: &AlgebraArgs, cfg: &SessionConfig) -> Result<LCAPresentation> {
    match (&a.catalog, &a.file) {
        (Some(_), Some(_)) => Err(CliError::Config("give either a file or --catalog".into())),
        (Some(name), None) => {
            let (c, m) = take_params(&a.params, cfg, &["c", "m"])?;
            Ok(catalog(name, &CatalogParams { c, m, n: cfg.n.unwrap_or(1) })?)
        }
        (None, Some(f)) => {
            if !a.params.is_empty() {
                return Err(CliError::Config("--param only applies to catalog entries".into()));
            }
            let doc = parse(&read_source(f)?)?;
            let spec = doc.algebra(a.algebra.as_deref()).ok_or_else(|| match &a.algebra {
                Some(n) => CliError::Config(format!("no algebra named {}", n)),
                None => CliError::Config("the input has no presentation".into()),
            })?;
            Eval::new(Some(&doc), cfg.grassmann).algebra(spec)
        }
        (None, None) => Err(CliError::Config("no input file and no --catalog".into())),
    }
}

/// Mode table implied by a catalog entry, if any.
fn default_table(a: &AlgebraArgs, cfg: &SessionConfig) -> Option<&'static str> {
    let n = cfg.n.unwrap_or(1);
    match a.catalog.as_deref()?.to_ascii_lowercase().as_str() {
        "virasoro" => Some("virasoro"),
        "ns" => Some("ns"),
        "n2" => Some("n2"),
        "n2tilde" => Some("n2tilde"),
        "n2g" => Some("n2g"),
        "bf" => Some("bf"),
        "b2" => Some("b2"),
        "k" if n == 1 => Some("ns"),
        "w" if n == 1 => Some("n2"),
        _ => None,
    }
}

/// The CLI's k12 is the complex-chart family in which the bundle modules
/// are written; `k12real` selects the G1, G2 basis.
fn cli_family(s: &str) -> Result<Family> {
    match s.to_ascii_lowercase().as_str() {
        "k12" => Ok(Family::K12Complex),
        "k12real" => Ok(Family::K12),
        _ => Family::parse(s).map_err(|_| CliError::Config(format!("unknown family {} (k11, k12, k12real or w11)", s))),
    }
}

fn family_variant(f: Family) -> Variant {
    match f {
        Family::W11 => Variant::NW,
        _ => Variant::NK,
    }
}

fn cell_detail(got: &SuperMatrix<SuperSeries>, want: &SuperMatrix<SuperSeries>, off: &[(usize, usize)]) -> String {
    let Some(&(i, j)) = off.first() else { return String::new() };
    let diff = got.get(i, j).sub(want.get(i, j));
    let cells: Vec<String> = off.iter().map(|(i, j)| format!("({},{})", i + 1, j + 1)).collect();
    format!("entries {} differ; ({},{}) first term {}", cells.join(" "), i + 1, j + 1, first_term(&diff).unwrap_or_default())
}

// ---------------------------------------------------------------------------
// algebras

fn check_algebra(rep: &mut Report, cfg: &SessionConfig, a: &AlgebraArgs, window: i64, table: Option<&str>) -> Result<()> {
    let alg = load_algebra(a, cfg)?;
    let r = check_mode_consistency(&alg, window)?;
    rep.value("pairs", r.pairs);
    rep.value("triples", r.triples);
    let first = |v: &[String]| v.first().map(|f| format!("{} failures, first {}", v.len(), f)).unwrap_or_default();
    rep.check("antisymmetry", r.antisymmetry(), first(&r.antisymmetry_failures));
    rep.check("jacobi", r.jacobi(), first(&r.jacobi_failures));
    if let Some(t) = table.or_else(|| default_table(a, cfg)) {
        let basis = relabel_modes(&alg)?;
        let tr = check_table(&alg, &basis, t, window)?;
        rep.value("table_brackets", tr.checked);
        rep.check(&format!("table.{}", t), tr.ok(), first(&tr.mismatches));
    }
    Ok(())
}

fn parse_mode(s: &str) -> Result<(String, Rational64)> {
    let (f, n) = s.rsplit_once('_').ok_or_else(|| CliError::Config(format!("mode {} should look like L_-1 or G_1/2", s)))?;
    let n: Rational64 = n.parse().map_err(|_| CliError::Config(format!("bad mode index in {}", s)))?;
    Ok((f.to_string(), n))
}

fn mode_bracket(rep: &mut Report, cfg: &SessionConfig, a: &AlgebraArgs, x: &str, y: &str, table: Option<&str>) -> Result<()> {
    let alg = load_algebra(a, cfg)?;
    let basis = relabel_modes(&alg)?;
    let calc = ModeCalc::new(&alg);
    let (fx, m) = parse_mode(x)?;
    let (fy, n) = parse_mode(y)?;
    let ix = basis.field_index(&fx).ok_or_else(|| CliError::Config(format!("no field {}", fx)))?;
    let iy = basis.field_index(&fy).ok_or_else(|| CliError::Config(format!("no field {}", fy)))?;
    for (i, k, s) in [(ix, m, x), (iy, n, y)] {
        if !basis.indices(i, k.to_integer().abs() + 1).contains(&k) {
            return Err(CliError::Config(format!("{} has the wrong index type for its weight", s)));
        }
    }
    let got = basis.bracket(&calc, (ix, m), (iy, n))?;
    rep.value("bracket", format!("[{}, {}] = {}", x, y, got));
    if let Some(t) = table.or_else(|| default_table(a, cfg)) {
        let want = expected_bracket(t, &fx, m, &fy, n).or_else(|| {
            // [y, x] = −(−1)^{|x||y|}[x, y]
            let odd = basis.fields[ix].parity.is_odd() && basis.fields[iy].parity.is_odd();
            expected_bracket(t, &fy, n, &fx, m).map(|e| e.scale(&Scalar::int(if odd { 1 } else { -1 })))
        });
        match want {
            Some(w) => {
                let detail = if w == got { String::new() } else { format!("expected {}", w) };
                rep.check(&format!("table.{}", t), w == got, detail);
            }
            None => rep.check(&format!("table.{}", t), false, "pair not listed in the table"),
        }
    }
    Ok(())
}

fn ope_check(rep: &mut Report, cfg: &SessionConfig, a: &AlgebraArgs, window: i32, pair: Option<&str>) -> Result<()> {
    let alg = load_algebra(a, cfg)?;
    let pairs: Vec<(usize, usize)> = match pair {
        Some(p) => {
            let (x, y) = p.split_once(',').ok_or_else(|| CliError::Config("--pair takes A,B".into()))?;
            let g = |s: &str| alg.index(s.trim()).ok_or_else(|| CliError::Config(format!("no generator {}", s.trim())));
            vec![(g(x)?, g(y)?)]
        }
        None => {
            let k = alg.gens.len();
            (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect()
        }
    };
    let results: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = pairs.iter().map(|&(i, j)| s.spawn({ let alg = &alg; move || (i, j, ope_distribution(alg, i, j, window)) })).collect();
        hs.into_iter().map(|h| h.join().expect("ope worker panicked")).collect()
    });
    for (i, j, r) in results {
        let r = r?;
        let name = format!("ope.{}.{}", alg.gens[i].name, alg.gens[j].name);
        let detail = r.mismatches.first().map(|m| format!("{} coefficients differ, first {}", r.mismatches.len(), m)).unwrap_or_default();
        rep.check(&name, r.forms_agree && r.modes_agree, detail);
    }
    Ok(())
}

fn catalog_cmd(rep: &mut Report, cfg: &SessionConfig, list: bool, name: Option<&str>, params: &[String]) -> Result<()> {
    if list || name.is_none() {
        for (n, d) in catalog_names() {
            rep.value(&format!("algebra.{}", n), d);
        }
        for (n, d) in module_names() {
            rep.value(&format!("module.{}", n), d);
        }
        return Ok(());
    }
    let name = name.unwrap();
    let (c, m) = take_params(params, cfg, &["c", "m"])?;
    if catalog_names().iter().any(|(n, _)| n.eq_ignore_ascii_case(name)) {
        let alg = catalog(name, &CatalogParams { c, m, n: cfg.n.unwrap_or(1) })?;
        rep.value("variant", format!("{} {}", alg.variant, alg.n));
        for g in &alg.gens {
            rep.value(&format!("gen.{}", g.name), g);
        }
        for ((a, b), p) in &alg.table {
            rep.value(&format!("bracket.[{},{}]", alg.gens[*a].name, alg.gens[*b].name), p.display_with(&alg.gens));
        }
        return Ok(());
    }
    let module = module_catalog(name, &ModuleParams { m, c })?;
    module_report(rep, &module);
    Ok(())
}

fn module_report(rep: &mut Report, m: &FiniteAutModule) {
    rep.value("family", m.family);
    for b in &m.basis {
        let p = if b.parity.is_odd() { "odd" } else { "even" };
        rep.value(&format!("basis.{}", b.name), format!("{} weight {} charge {}", p, b.weight, b.charge));
    }
    for (label, index) in m.operators() {
        rep.scalar_matrix(&format!("{}_{}", label, index), &m.operator(&label, index));
    }
}

// ---------------------------------------------------------------------------
// gl(1|1)

fn gl11_show(rep: &mut Report, prefix: &str, r: &GL11Rep) {
    rep.value(&format!("{}label", prefix), &r.label);
    for (name, m) in r.ops() {
        rep.scalar_matrix(&format!("{}{}", prefix, name), m);
    }
}

fn gl11_cmd(rep: &mut Report, r: Option<&str>, dual: bool, shift: bool, module: Option<&str>, block: &str) -> Result<()> {
    let parsed = r.map(superfield::bundle::parse_gl11).transpose()?;
    if let Some(mname) = module {
        let m = module_catalog(mname, &ModuleParams::default())?;
        let names: Vec<&str> = block.split(',').map(str::trim).collect();
        let got = gl11_from_module(&m, &names)?;
        gl11_show(rep, "", &got);
        for (name, ok) in gl11_relations(&got) {
            rep.check(&format!("relation.{}", name), ok, "");
        }
        if let Some((k, t, j)) = &parsed {
            let want = gl11_build(*k, t, j);
            let same = got.ops().iter().zip(want.ops().iter()).all(|((_, a), (_, b))| a.same(b));
            rep.check(&format!("matches {}", want.label), same, "");
        }
        return Ok(());
    }
    let (k, t, j) = parsed.ok_or_else(|| CliError::Config("give a representation such as pi+(t,j), or --module".into()))?;
    let base = gl11_build(k, &t, &j);
    gl11_show(rep, "", &base);
    for (name, ok) in gl11_relations(&base) {
        rep.check(&format!("relation.{}", name), ok, "");
    }
    if dual {
        let (d, target, s) = gl11_dual_witness(k, &t, &j)?;
        gl11_show(rep, "dual.", &d);
        rep.value("dual.iso", &target.label);
        rep.scalar_matrix("dual.S", &s);
        rep.check("dual.intertwiner", intertwines(&s, &target, &d), "");
    }
    if shift {
        let (p, target, s) = gl11_parity_witness(k, &t, &j);
        gl11_show(rep, "shift.", &p);
        rep.value("shift.iso", &target.label);
        rep.scalar_matrix("shift.S", &s);
        rep.check("shift.intertwiner", intertwines(&s, &target, &p), "");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// selftest

type Outcome = Vec<(String, bool, String)>;

fn ok(name: &str, pass: bool) -> (String, bool, String) {
    (name.to_string(), pass, String::new())
}

fn laws(seed: u64, trunc: i32) -> Outcome {
    let mut s = Sampler::new(seed);
    let mut out = Vec::new();
    let mut inv = true;
    for _ in 0..10 {
        let u = s.unit_scalar().add(&s.odd_scalar());
        inv &= u.invert().is_ok_and(|v| u.mul(&v).is_one() && v.mul(&u).is_one());
    }
    out.push(ok("scalar.inverse", inv));
    for variant in [Variant::NK, Variant::NW] {
        let (mut assoc, mut coc) = (true, true);
        for n in 1..=2 {
            for _ in 0..2 {
                let (a, b, c) = (s.change(n, trunc, variant), s.change(n, trunc, variant), s.change(n, trunc, variant));
                let l = a.compose(&b).and_then(|ab| ab.compose(&c));
                let r = b.compose(&c).and_then(|bc| a.compose(&bc));
                assoc &= matches!((l, r), (Ok(l), Ok(r)) if l.eq_trunc(&r));
                coc &= cocycle_sides(&a, &b).is_ok_and(|(x, y)| x.eq_trunc(&y));
            }
        }
        let v = variant.to_string().to_ascii_lowercase();
        out.push(ok(&format!("compose.associative.{}", v), assoc));
        out.push(ok(&format!("localize.cocycle.{}", v), coc));
    }
    let z = SuperSeries::z(Chart::new(1), trunc);
    out.push(ok(
        "shift.asymmetry.nk",
        !z.taylor_shift(Variant::NK, Dir::Left).eq_trunc(&z.taylor_shift(Variant::NK, Dir::Right)),
    ));
    out
}

fn conformal(seed: u64, trunc: i32) -> Outcome {
    let mut s = Sampler::new(seed);
    let (mut closed, mut proj, mut ber) = (true, true, true);
    let d = |x: &SuperSeries| x.derive(Derivation::D(1)).unwrap();
    for _ in 0..4 {
        let (a, b) = (s.superconformal_n1(trunc), s.superconformal_n1(trunc));
        closed &= a.compose(&b).is_ok_and(|c| c.is_superconformal(Level::N1));
        let (m, rho) = superprojective_sample(&mut s, trunc);
        proj &= m.sdet().is_ok_and(|x| x.is_one()) && rho.schwarzian().is_ok_and(|x| x.is_zero());
        let want = d(&d(&a.f).div(&d(&a.psi[0])).unwrap());
        ber &= a.jacobian().sdet().is_ok_and(|x| x.eq_trunc(&want));
    }
    vec![
        ok("superconformal.closure", closed),
        ok("schwarzian.superprojective", proj),
        ok("sdet.berezinian", ber),
    ]
}

fn deltas() -> Outcome {
    let mut out = Vec::new();
    for variant in [Variant::NK, Variant::NW] {
        let all = (0..=2).all(|j| (0..2).all(|jm| delta_expand(1, variant, j, jm, 4).agree));
        out.push(ok(&format!("delta.n1.{}", variant.to_string().to_ascii_lowercase()), all));
    }
    out
}

fn tables() -> Outcome {
    [("virasoro", 0, "virasoro"), ("ns", 0, "ns"), ("k", 1, "ns")]
        .into_iter()
        .map(|(name, n, table)| {
            let r = catalog(name, &CatalogParams { n, ..CatalogParams::default() })
                .and_then(|alg| relabel_modes(&alg).and_then(|b| check_table(&alg, &b, table, 2)));
            let (pass, detail) = match r {
                Ok(r) => (r.ok(), r.mismatches.first().cloned().unwrap_or_default()),
                Err(e) => (false, e.to_string()),
            };
            (format!("table.{}.{}", name, table), pass, detail)
        })
        .collect()
}

fn gl11_suite() -> Outcome {
    let (t, j) = (Scalar::param("t"), Scalar::param("j"));
    let kinds = [GL11Kind::Plus, GL11Kind::Minus, GL11Kind::PlusT, GL11Kind::MinusT];
    let rel = kinds.iter().all(|k| gl11_relations(&gl11_build(*k, &t, &j)).iter().all(|(_, ok)| *ok));
    let dual = kinds.iter().all(|k| gl11_dual_witness(*k, &t, &j).is_ok_and(|(d, tg, s)| intertwines(&s, &tg, &d)));
    let shift = kinds.iter().all(|k| {
        let (p, tg, s) = gl11_parity_witness(*k, &t, &j);
        intertwines(&s, &tg, &p)
    });
    vec![ok("gl11.relations", rel), ok("gl11.dual", dual), ok("gl11.shift", shift)]
}

/// Representation check, then the cocycle on random pairs when the module
/// is a representation at all.
fn module_suite(name: &str, seed: u64) -> Outcome {
    let m = module_catalog(name, &ModuleParams::default()).unwrap();
    let defects = m.representation_defects();
    let mut out = vec![(format!("module.{}.representation", name), defects.is_empty(), defects.first().cloned().unwrap_or_default())];
    if defects.is_empty() {
        let mut s = Sampler::new(seed);
        let mut bad = 0;
        for _ in 0..3 {
            let a = sample_change(m.family, &mut s, 6);
            let b = sample_change(m.family, &mut s, 6);
            if !cocycle_check(&m, &a, &b).is_ok_and(|r| r.holds) {
                bad += 1;
            }
        }
        out.push((format!("module.{}.cocycle", name), bad == 0, if bad > 0 { format!("{}/3 pairs fail", bad) } else { String::new() }));
    }
    out
}

fn display_suite(name: &str, seed: u64) -> Outcome {
    let p = ModuleParams::default();
    let m = module_catalog(name, &p).unwrap();
    let mut s = Sampler::new(seed);
    let rho = sample_change(m.family, &mut s, 8);
    let (t, c) = (transition_matrix(&m, &rho), closed_form_matrix(&m, &rho, &p));
    let (pass, detail) = match (t, c) {
        (Ok(t), Ok(c)) => {
            let off = mismatched_entries(&t, &c);
            (off.is_empty(), cell_detail(&t, &c, &off))
        }
        (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
    };
    vec![(format!("display.{}", name), pass, detail)]
}

fn reference_suite() -> Outcome {
    let mut out = Vec::new();
    for f in [Family::K11, Family::W11, Family::K12Complex] {
        let r = verify_family(f, 2);
        out.push((format!("family.{}", f), r.mismatches.is_empty(), r.mismatches.first().map(|m| m.lhs.clone()).unwrap_or_default()));
    }
    for name in ["B1_half", "K1_3half", "K2_1", "B2_half", "B2W_0"] {
        let q = |k| superfield::scalar::qi_int(k);
        let pass = [(0, true), (1, false), (-2, false)]
            .iter()
            .all(|&(v, split)| extension_class(name, &q(v), 6).is_ok_and(|e| e.split == split));
        out.push(ok(&format!("extension.{}", name), pass));
    }
    out
}

fn selftest(rep: &mut Report, cfg: &SessionConfig, closed_forms: bool) {
    let trunc = cfg.trunc.min(6);
    let seed = cfg.seed;
    let mods: Vec<&'static str> = module_names().into_iter().map(|(n, _)| n).collect();
    let mut jobs: Vec<Box<dyn FnOnce() -> Outcome + Send>> = vec![
        Box::new(move || laws(seed, trunc.min(4))),
        Box::new(move || conformal(seed.wrapping_add(1), trunc)),
        Box::new(deltas),
        Box::new(tables),
        Box::new(gl11_suite),
    ];
    for (k, name) in mods.iter().enumerate() {
        let s = seed.wrapping_add(10 + k as u64);
        jobs.push(Box::new(move || module_suite(name, s)));
        if closed_forms {
            jobs.push(Box::new(move || display_suite(name, s)));
        }
    }
    if closed_forms {
        jobs.push(Box::new(reference_suite));
    }
    let results: Vec<Outcome> = std::thread::scope(|sc| {
        let hs: Vec<_> = jobs.into_iter().map(|j| sc.spawn(j)).collect();
        hs.into_iter().map(|h| h.join().expect("selftest worker panicked")).collect()
    });
    for (name, pass, detail) in results.into_iter().flatten() {
        rep.check(&name, pass, detail);
    }
}
