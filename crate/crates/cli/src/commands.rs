use std::collections::BTreeMap;

use cartier_lab_core::cartier::{
    compare_norm, derived_v_completeness, fixed_pi0, hom_cartier, orbit_pi0, tc_heart, CartierStage, EtaCartierComplex,
    TruncatedCartierComplex,
};
use cartier_lab_core::dieudonne::{self, bridge_faithfulness, charpoly, hom_dieudonne, is_formal, newton_slopes, verify_dieudonne, DieudonneModule};
use cartier_lab_core::drw::{check_identities, normalize, to_cartier, DRWComplex, Expr};
use cartier_lab_core::eta::{EtaRing, GradedEtaModule};
use cartier_lab_core::filtered::{
    cyclic_fixed_points_via_n_series, day_tensor, n_series_oracle, pullback, rational_tc_sphere, ChainMap, CoeffRing,
    FilteredComplex, FilteredMap,
};
use cartier_lab_core::json::SCHEMA;
use cartier_lab_core::linalg::IntMatrix;
use cartier_lab_core::suite::{self, SuiteReport};
use cartier_lab_core::witt::structure::is_prime;
use cartier_lab_core::witt::{structure_polys, IntPoly, Integers, PrimeField, PrimeFieldPoly, WittBase, WittVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{usage, CliError};
use crate::input::{components, parse_as, range, read_source, Profile};
use crate::*;

pub struct Outcome {
    pub value: Value,
    pub checks_failed: bool,
}

struct Ctx {
    profile: Profile,
    seed: u64,
}

impl Ctx {
    fn p(&self, flag: Option<u64>) -> Result<u64, CliError> {
        let p = flag.or(self.profile.p).unwrap_or(2);
        if !is_prime(p) {
            return Err(usage(format!("p = {p} is not prime")));
        }
        Ok(p)
    }

    fn positive(name: &str, v: u32) -> Result<u32, CliError> {
        if v == 0 {
            return Err(usage(format!("{name} must be positive")));
        }
        Ok(v)
    }

    fn m(&self, flag: Option<u32>) -> Result<u32, CliError> {
        Self::positive("m", flag.or(self.profile.m).unwrap_or(2))
    }

    fn k(&self, flag: Option<u32>) -> Result<u32, CliError> {
        Self::positive("k", flag.or(self.profile.k).unwrap_or(4))
    }

    fn depth(&self, flag: Option<u32>, fallback: u32) -> Result<u32, CliError> {
        Self::positive("depth", flag.or(self.profile.depth).unwrap_or(fallback))
    }

    fn deg(&self, flag: Option<u64>) -> u64 {
        flag.or(self.profile.deg).unwrap_or(6)
    }

    fn ranges(&self, degrees: &Option<String>, weights: &Option<String>, x: &FilteredComplex) -> Result<((i64, i64), (i64, i64)), CliError> {
        let d = match degrees {
            Some(s) => range(s)?,
            None => self.profile.degrees.or(x.degree_range()).unwrap_or((0, 0)),
        };
        let w = match weights {
            Some(s) => range(s)?,
            None => self.profile.weights.unwrap_or((x.w_min() - 1, x.w_max() + 1)),
        };
        Ok((d, w))
    }
}

fn envelope(command: &str, body: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("command".into(), json!(command));
    if let Value::Object(o) = body {
        out.extend(o);
    }
    Value::Object(out)
}

pub fn run(cli: &Cli, profile: Profile) -> Result<Outcome, CliError> {
    let seed = cli.seed.or(profile.seed).unwrap_or(0);
    let ctx = Ctx { profile, seed };
    let (name, body, checks_failed) = match &cli.command {
        Command::Witt(c) => (format!("witt {}", witt_name(c)), witt(&ctx, c)?, false),
        Command::Filtered(c) => (format!("filtered {}", filtered_name(c)), filtered(&ctx, c)?, false),
        Command::Cartier(c) => (format!("cartier {}", cartier_name(c)), cartier(&ctx, c)?, false),
        Command::Drw(c) => (format!("drw {}", drw_name(c)), drw(&ctx, c)?, false),
        Command::Dieudonne(c) => (format!("dieudonne {}", dieudonne_name(c)), dieudonne_cmd(&ctx, c)?, false),
        Command::Suite(a) => {
            let (body, failed) = run_suite(&ctx, a)?;
            ("suite".to_string(), body, failed)
        }
    };
    Ok(Outcome { value: envelope(&name, body), checks_failed })
}

// ---------------------------------------------------------------- witt

fn witt_name(c: &WittCmd) -> &'static str {
    match c {
        WittCmd::Arith { .. } => "arith",
        WittCmd::Ghost { .. } => "ghost",
        WittCmd::StructurePolys { .. } => "structure-polys",
    }
}

fn arith<B: WittBase>(p: u64, base: B, op: WittOp, a: &[Value], b: Option<&[Value]>) -> Result<Value, CliError> {
    let x = WittVector::from_json_components(p, base.clone(), a)?;
    let y = || -> Result<WittVector<B>, CliError> {
        let b = b.ok_or_else(|| usage("--b is required for this operation"))?;
        Ok(WittVector::from_json_components(p, base.clone(), b)?)
    };
    let r = match op {
        WittOp::Add => x.add(&y()?)?,
        WittOp::Sub => x.sub(&y()?)?,
        WittOp::Mul => x.mul(&y()?)?,
        WittOp::Neg => x.neg()?,
        WittOp::Frobenius => x.frobenius()?,
        WittOp::Verschiebung => x.verschiebung()?,
        WittOp::Restrict => x.restrict()?,
    };
    Ok(json!({"op": format!("{op:?}").to_lowercase(), "a": x.to_json(), "result": r.to_json()}))
}

fn ghost<B: WittBase>(p: u64, base: B, comps: &[Value]) -> Result<Value, CliError> {
    let x = WittVector::from_json_components(p, base.clone(), comps)?;
    let g: Vec<Value> = x.ghost()?.iter().map(|c| base.elem_to_json(c)).collect();
    Ok(json!({"p": p, "n": x.len(), "components": x.to_json()["components"].clone(), "ghost": g}))
}

fn witt(ctx: &Ctx, c: &WittCmd) -> Result<Value, CliError> {
    match c {
        WittCmd::Arith { prime, base, deg_bound, op, a, b } => {
            let p = ctx.p(prime.p)?;
            let a = components(a)?;
            let b = b.as_deref().map(components).transpose()?;
            let b = b.as_deref();
            match base {
                BaseArg::Fp => arith(p, PrimeField { p }, *op, &a, b),
                BaseArg::Fpx => {
                    let deg_bound = deg_bound.ok_or_else(|| usage("--deg-bound is required over F_p[x]"))?;
                    arith(p, PrimeFieldPoly { p, deg_bound }, *op, &a, b)
                }
                BaseArg::Z => arith(p, Integers, *op, &a, b),
                BaseArg::Zx => arith(p, IntPoly, *op, &a, b),
            }
        }
        WittCmd::Ghost { prime, n, components: comps, base } => {
            let p = ctx.p(prime.p)?;
            let comps = components(comps)?;
            if let Some(n) = *n {
                if n != comps.len() {
                    return Err(usage(format!("--n {n} but {} components given", comps.len())));
                }
            }
            match base {
                BaseArg::Z => ghost(p, Integers, &comps),
                BaseArg::Zx => ghost(p, IntPoly, &comps),
                _ => Err(usage("ghost components need a p-torsion-free base (z or zx)")),
            }
        }
        WittCmd::StructurePolys { prime, n } => {
            let p = ctx.p(prime.p)?;
            let n = n.or(ctx.profile.n).unwrap_or(3);
            let s = structure_polys(p, n)?;
            let names = s.variable_names();
            let check = s.verify_ghost_identities();
            let (sum_terms, prod_terms) = s.term_counts();
            Ok(json!({
                "p": p,
                "n": n,
                "sums": s.sums.iter().map(|f| f.render(&names)).collect::<Vec<_>>(),
                "prods": s.prods.iter().map(|f| f.render(&names)).collect::<Vec<_>>(),
                "sum_terms": sum_terms,
                "prod_terms": prod_terms,
                "ghost_identities": check.all_ok(),
            }))
        }
    }
}

// ---------------------------------------------------------------- filtered

fn filtered_name(c: &FilteredCmd) -> &'static str {
    match c {
        FilteredCmd::Homotopy { .. } => "homotopy",
        FilteredCmd::Tensor { .. } => "tensor",
        FilteredCmd::Truncate { .. } => "truncate",
        FilteredCmd::Pullback { .. } => "pullback",
        FilteredCmd::TcSphere { .. } => "tc-sphere",
        FilteredCmd::CyclicN { .. } => "cyclic-n",
    }
}

fn load_filtered(src: &str) -> Result<FilteredComplex, CliError> {
    let x: FilteredComplex = parse_as(read_source(src)?, "complex")?;
    x.validate()?;
    Ok(x)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorInput {
    left: FilteredComplex,
    right: FilteredComplex,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapInput {
    src: FilteredComplex,
    dst: FilteredComplex,
    #[serde(default)]
    maps: BTreeMap<i64, ChainMap>,
}

impl MapInput {
    fn build(self) -> Result<FilteredMap, CliError> {
        self.src.validate()?;
        self.dst.validate()?;
        Ok(FilteredMap::new(&self.src, &self.dst, self.maps)?)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PullbackInput {
    f: MapInput,
    g: MapInput,
}

fn with_table(ctx: &Ctx, x: &FilteredComplex, degrees: &Option<String>, weights: &Option<String>) -> Result<Value, CliError> {
    let (d, w) = ctx.ranges(degrees, weights, x)?;
    Ok(json!({"complex": x, "table": x.table(d, w).to_json()}))
}

fn filtered(ctx: &Ctx, c: &FilteredCmd) -> Result<Value, CliError> {
    match c {
        FilteredCmd::Homotopy { input, degrees, weights } => {
            let x = load_filtered(input)?;
            let (d, w) = ctx.ranges(degrees, weights, &x)?;
            Ok(json!({"table": x.table(d, w).to_json()}))
        }
        FilteredCmd::Tensor { input, degrees, weights } => {
            let t: TensorInput = serde_json::from_value(read_source(input)?)?;
            t.left.validate()?;
            t.right.validate()?;
            with_table(ctx, &day_tensor(&t.left, &t.right)?, degrees, weights)
        }
        FilteredCmd::Truncate { input, k, kind } => {
            let x = load_filtered(input)?;
            let y = match kind {
                TruncationKind::Postnikov => x.truncate_postnikov(*k),
                TruncationKind::Neutral => x.truncate_neutral(*k),
            };
            with_table(ctx, &y, &None, &None)
        }
        FilteredCmd::Pullback { input, degrees, weights } => {
            let t: PullbackInput = serde_json::from_value(read_source(input)?)?;
            let (f, g) = (t.f.build()?, t.g.build()?);
            with_table(ctx, &pullback(&f, &g)?, degrees, weights)
        }
        FilteredCmd::TcSphere { n } => {
            let n = n.unwrap_or(4);
            if n < 1 {
                return Err(usage("--N must be positive"));
            }
            let (x, t) = rational_tc_sphere(n)?;
            Ok(json!({"N": n, "complex": x, "table": t.to_json()}))
        }
        FilteredCmd::CyclicN { n, deg } => {
            if *n < 1 {
                return Err(usage("--n must be positive"));
            }
            let bound = deg.or(ctx.profile.deg.map(|d| d as i64)).unwrap_or(12);
            let (x, t) = cyclic_fixed_points_via_n_series(*n, CoeffRing::Z, bound)?;
            let oracle = n_series_oracle(*n, bound);
            Ok(json!({"n": n, "bound": bound, "complex": x, "table": t.to_json(), "matches_periodic_resolution": t.levels == oracle.levels}))
        }
    }
}

// ---------------------------------------------------------------- cartier

fn cartier_name(c: &CartierCmd) -> &'static str {
    match c {
        CartierCmd::Verify(_) => "verify",
        CartierCmd::Norm(_) => "norm",
        CartierCmd::Fixed(_) => "fixed",
        CartierCmd::Orbit(_) => "orbit",
        CartierCmd::Complete { .. } => "complete",
        CartierCmd::Tc { .. } => "tc",
        CartierCmd::Hom { .. } => "hom",
    }
}

enum Loaded {
    Full(EtaCartierComplex),
    Truncated(TruncatedCartierComplex),
}

fn check_module(m: GradedEtaModule) -> Result<GradedEtaModule, CliError> {
    Ok(GradedEtaModule::new(m.ring, m.weights, m.relations, m.eta, m.d)?)
}

fn check_stage(s: CartierStage) -> Result<CartierStage, CliError> {
    let module = check_module(s.module)?;
    if module.ring != EtaRing::Base {
        return Err(usage("Cartier stages must be over BASE"));
    }
    Ok(CartierStage { module, d: s.d })
}

fn check_prime(p: u64) -> Result<u64, CliError> {
    if !is_prime(p) {
        return Err(usage(format!("p = {p} is not prime")));
    }
    Ok(p)
}

impl Loaded {
    fn from_spec(ctx: &Ctx, spec: &str, p: Option<u64>, k: Option<u32>) -> Result<Self, CliError> {
        if spec == "witt" {
            return Ok(Loaded::Full(EtaCartierComplex::witt(ctx.p(p)?, ctx.k(k)?)));
        }
        let v = read_source(spec)?;
        let v = match v {
            Value::Object(mut o) if o.contains_key("complex") => o.remove("complex").unwrap(),
            v => v,
        };
        if v.get("lower").is_some() {
            let t: TruncatedCartierComplex = serde_json::from_value(v)?;
            let t = TruncatedCartierComplex { p: check_prime(t.p)?, lower: check_stage(t.lower)?, upper: check_stage(t.upper)?, ..t };
            t.validate_shapes()?;
            Ok(Loaded::Truncated(t))
        } else {
            let m: EtaCartierComplex = serde_json::from_value(v)?;
            Ok(Loaded::Full(EtaCartierComplex::new(check_prime(m.p)?, check_module(m.module)?, m.d, m.f, m.v)?))
        }
    }

    fn p(&self) -> u64 {
        match self {
            Loaded::Full(m) => m.p,
            Loaded::Truncated(t) => t.p,
        }
    }

    fn truncated(&self) -> TruncatedCartierComplex {
        match self {
            Loaded::Full(m) => m.as_truncated(),
            Loaded::Truncated(t) => t.clone(),
        }
    }

    fn full(self) -> Result<EtaCartierComplex, CliError> {
        match self {
            Loaded::Full(m) => Ok(m),
            Loaded::Truncated(t) => Ok(t.collapse()?),
        }
    }
}

fn cartier(ctx: &Ctx, c: &CartierCmd) -> Result<Value, CliError> {
    let load = |i: &CartierInput| Loaded::from_spec(ctx, &i.input, i.p, i.k);
    match c {
        CartierCmd::Verify(i) => {
            let m = load(i)?;
            let report = match &m {
                Loaded::Full(m) => m.verify(),
                Loaded::Truncated(t) => t.verify(),
            };
            Ok(json!({"p": m.p(), "report": report}))
        }
        CartierCmd::Norm(i) => {
            let t = load(i)?.truncated();
            Ok(json!({"p": t.p, "comparison": compare_norm(&t)?}))
        }
        CartierCmd::Fixed(i) => {
            let t = load(i)?.truncated();
            let n = fixed_pi0(t.p, &t.lower);
            Ok(json!({
                "p": t.p,
                "weights": n.weights,
                "group": n.group,
                "first": n.first,
                "second": n.second,
            }))
        }
        CartierCmd::Orbit(i) => {
            let t = load(i)?.truncated();
            let o = orbit_pi0(t.p, &t.lower);
            Ok(json!({"p": t.p, "module": o.module, "group": o.module.group(), "e": o.e, "canonical": o.canonical}))
        }
        CartierCmd::Complete { input, depth } => {
            let t = load(input)?.truncated();
            let depth = ctx.depth(*depth, 6)?;
            let r = derived_v_completeness(t.p, &t.lower, &t.v_bar(), depth);
            Ok(json!({"p": t.p, "depth": depth, "complete": r.complete, "nilpotency": r.nilpotency}))
        }
        CartierCmd::Tc { input, frob, depth } => {
            let m = load(input)?.full()?;
            let depth = ctx.depth(*depth, 6)?;
            let f = match frob {
                FrobArg::Identity => IntMatrix::identity(m.ngens()),
                FrobArg::F => m.f.clone(),
            };
            let h = tc_heart(&m, &f, depth)?;
            let types = |g: &BTreeMap<i64, _>| -> BTreeMap<String, String> {
                g.iter().map(|(w, x): (&i64, &cartier_lab_core::FGAbelianGroup)| (w.to_string(), x.group_type().to_string())).collect()
            };
            Ok(json!({"p": m.p, "depth": depth, "H0": types(&h.h0), "H-1": types(&h.h_minus1)}))
        }
        CartierCmd::Hom { source, target, p, k, depth } => {
            let m = Loaded::from_spec(ctx, source, *p, *k)?.full()?;
            let n = Loaded::from_spec(ctx, target, *p, *k)?.full()?;
            let depth = ctx.depth(*depth, 4)?;
            Ok(json!({"p": m.p, "hom": hom_cartier(&m, &n, depth)?}))
        }
    }
}

// ---------------------------------------------------------------- drw

fn drw_name(c: &DrwCmd) -> &'static str {
    match c {
        DrwCmd::Basis(_) => "basis",
        DrwCmd::Op { .. } => "op",
        DrwCmd::IdentitySuite { .. } => "identity-suite",
        DrwCmd::ToCartier { .. } => "to-cartier",
    }
}

fn drw(ctx: &Ctx, c: &DrwCmd) -> Result<Value, CliError> {
    let params = |a: &DrwArgs| -> Result<(u64, u32, u64), CliError> { Ok((ctx.p(a.p)?, ctx.m(a.m)?, ctx.deg(a.deg))) };
    match c {
        DrwCmd::Basis(a) => {
            let (p, m, deg) = params(a)?;
            Ok(json!({"complex": DRWComplex::new(p, m, deg)?.to_json()}))
        }
        DrwCmd::Op { args, expr } => {
            let (p, m, deg) = params(args)?;
            let e: Expr = parse_as(read_source(expr)?, "expr")?;
            let r = normalize(p, m, deg, &e)?;
            Ok(json!({"expr": e, "result": r.to_json()}))
        }
        DrwCmd::IdentitySuite { args, samples } => {
            let (p, m, deg) = params(args)?;
            let samples = samples.or(ctx.profile.samples).unwrap_or(20);
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let r = check_identities(p, m, deg, samples, &mut rng)?;
            Ok(json!({"seed": ctx.seed, "failures": r.failures.len(), "report": r}))
        }
        DrwCmd::ToCartier { args, twist } => {
            let (p, m, deg) = params(args)?;
            let t = to_cartier(p, m, deg, *twist)?;
            Ok(json!({"complex": t, "report": t.verify()}))
        }
    }
}

// ---------------------------------------------------------------- dieudonne

fn dieudonne_name(c: &DieudonneCmd) -> &'static str {
    match c {
        DieudonneCmd::Verify { .. } => "verify",
        DieudonneCmd::Slopes { .. } => "slopes",
        DieudonneCmd::Hom { .. } => "hom",
        DieudonneCmd::Bridge { .. } => "bridge",
    }
}

fn load_module(ctx: &Ctx, spec: &str, a: &ModuleArgs) -> Result<DieudonneModule, CliError> {
    let named = |f: fn(u64, u32) -> DieudonneModule| -> Result<DieudonneModule, CliError> { Ok(f(ctx.p(a.p)?, ctx.k(a.k)?)) };
    match spec {
        "etale" => named(DieudonneModule::etale),
        "formal" => named(DieudonneModule::formal),
        "supersingular" => named(DieudonneModule::supersingular),
        _ => {
            let m: DieudonneModule = parse_as(read_source(spec)?, "module")?;
            Ok(DieudonneModule::new(check_prime(m.p)?, m.k, m.f, m.v)?)
        }
    }
}

fn dieudonne_cmd(ctx: &Ctx, c: &DieudonneCmd) -> Result<Value, CliError> {
    match c {
        DieudonneCmd::Verify { module, args } => {
            let m = load_module(ctx, module, args)?;
            Ok(json!({"module": m, "report": verify_dieudonne(&m), "formal": is_formal(&m), "v_complete": dieudonne::is_v_complete(&m)}))
        }
        DieudonneCmd::Slopes { module, args } => {
            let m = load_module(ctx, module, args)?;
            let cp: Vec<String> = charpoly(&m.f).iter().map(|c| c.to_string()).collect();
            Ok(json!({"module": m, "charpoly": cp, "slopes": newton_slopes(&m)?}))
        }
        DieudonneCmd::Hom { source, target, args, depth } => {
            let (m, n) = (load_module(ctx, source, args)?, load_module(ctx, target, args)?);
            let depth = ctx.depth(*depth, m.k.min(n.k))?;
            Ok(json!({"hom": hom_dieudonne(&m, &n, depth)?}))
        }
        DieudonneCmd::Bridge { source, target, args, depth } => {
            let (m, n) = (load_module(ctx, source, args)?, load_module(ctx, target, args)?);
            let depth = ctx.depth(*depth, m.k.min(n.k))?;
            Ok(json!({"bridge": bridge_faithfulness(&m, &n, depth)?}))
        }
    }
}

// ---------------------------------------------------------------- suite

fn summarize(reports: &[SuiteReport]) -> Value {
    let failures: usize = reports.iter().map(|r| r.failures().len()).sum();
    json!({"passed": failures == 0, "failures": failures, "suites": reports})
}

fn run_suite(ctx: &Ctx, a: &SuiteArgs) -> Result<(Value, bool), CliError> {
    let parameterized = a.p.is_some() || a.m.is_some() || a.deg.is_some();
    let reports = if parameterized {
        if a.name != "relations-drw" {
            return Err(usage("--p, --m and --deg only apply to relations-drw"));
        }
        let (p, m) = (ctx.p(a.p)?, ctx.m(a.m)?);
        vec![suite::relations_drw_for(p, m, ctx.deg(a.deg), ctx.seed)]
    } else {
        suite::run(&a.name, ctx.seed)?
    };
    let body = summarize(&reports);
    let failed = body["failures"] != 0;
    let mut body = body;
    body["name"] = json!(a.name);
    body["seed"] = json!(ctx.seed);
    Ok((body, failed))
}
