//! Command dispatch.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde_json::{Map, Value};

use entropy_core::depth::{depth_report_with_jobs, Antistability};
use entropy_core::discrete::{BandedEndo, FiniteSubgroup, TrajectoryReport};
use entropy_core::duality::{bridge, verify_duality_facts, weiss_bridge_check};
use entropy_core::finabel::{AbSubgroup, Hom};
use entropy_core::jobs::par_map;
use entropy_core::profinite::{
    kernel_cokernel_orders, log_law_check, quotient_system, topological_entropy, CylinderSubgroup, RowFiniteEndo,
};
use entropy_core::{EntropyValue, Error, Method, StabilizationPolicy};

use crate::build::{Model, Side};
use crate::report::{entropy, entry_error, int, ints, opt_int, put_entropy, Report, Status};
use crate::schema::Kind;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    AlgEntropy,
    TopEntropy,
    BridgeCheck,
    Depth,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::AlgEntropy => "alg-entropy",
            Command::TopEntropy => "top-entropy",
            Command::BridgeCheck => "bridge-check",
            Command::Depth => "depth",
            Command::Verify => "verify",
        }
    }

    pub const ALL: [Command; 5] = [
        Command::AlgEntropy,
        Command::TopEntropy,
        Command::BridgeCheck,
        Command::Depth,
        Command::Verify,
    ];
}

impl std::str::FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub method: Method,
    pub jobs: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            method: Method::Limit,
            jobs: 1,
        }
    }
}

type Entry = (Map<String, Value>, Status);

fn incompatible(cmd: Command, kind: Kind) -> CliError {
    CliError::validation(format!("`{}` does not apply to {} instances", cmd.name(), kind.name()))
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Limit => "limit",
        Method::LimitFree => "limitfree",
        Method::Surjective => "surjective",
    }
}

fn policy_json(p: &StabilizationPolicy) -> Value {
    let mut m = Map::new();
    m.insert("max_n".into(), int(p.max_n));
    m.insert("stall_window".into(), int(p.stall_window));
    m.insert("window_budget".into(), int(p.window_budget));
    Value::Object(m)
}

fn cylinder_json(u: &CylinderSubgroup) -> Value {
    let mut m = Map::new();
    let w = u.window();
    m.insert("window".into(), ints([&w.lo, &w.hi]));
    m.insert("index".into(), int(u.index()));
    Value::Object(m)
}

/// Collects entries, notes their statuses and reports the best certified
/// value when every entry certified.
fn collect(report: &mut Report, key: &str, best_key: &str, entries: Vec<Result<(Entry, Option<EntropyValue>), CliError>>) -> Result<(), CliError> {
    let mut list = Vec::with_capacity(entries.len());
    let mut best = Some(EntropyValue::zero());
    for e in entries {
        let ((m, s), value) = e?;
        report.note(s);
        best = match (best, value) {
            (Some(b), Some(v)) => Some(b.max(v)),
            _ => None,
        };
        list.push(Value::Object(m));
    }
    report.insert(key, Value::Array(list));
    match best {
        Some(b) => report.insert(best_key, entropy(&b)),
        None => report.insert(best_key, Value::Null),
    }
    Ok(())
}

fn trajectory_fields(m: &mut Map<String, Value>, r: &TrajectoryReport) {
    m.insert("orders".into(), ints(&r.orders()));
    m.insert("alphas".into(), ints(&r.alphas()));
    m.insert("n0".into(), r.n0.map_or(Value::Null, int));
    m.insert("n1".into(), r.n1.map_or(Value::Null, int));
}

fn alg_entry(
    endo: &BandedEndo,
    f: &FiniteSubgroup,
    method: Method,
    policy: &StabilizationPolicy,
) -> Result<(Entry, Option<EntropyValue>), CliError> {
    let report = match endo.trajectory_limits(f, policy) {
        Ok(r) => r,
        Err(e) => return entry_error(e).map(|x| (x, None)),
    };
    let value = match method {
        Method::Limit => report.limit_entropy(),
        _ => report.limitfree_entropy(),
    };
    let (mut m, status) = match value.clone() {
        Ok(v) => {
            let mut m = Map::new();
            m.insert("status".into(), "certified".into());
            put_entropy(&mut m, "entropy", &v);
            (m, Status::Ok)
        }
        Err(e) => entry_error(e)?,
    };
    m.insert("order".into(), int(f.order()));
    trajectory_fields(&mut m, &report);
    Ok(((m, status), value.ok()))
}

fn top_entry(
    psi: &RowFiniteEndo,
    u: &CylinderSubgroup,
    method: Method,
    policy: &StabilizationPolicy,
) -> Result<(Entry, Option<EntropyValue>), CliError> {
    let report = match psi.cotrajectory_limits(u, policy) {
        Ok(r) => r,
        Err(e) => return entry_error(e).map(|x| (x, None)),
    };
    let value = if report.certified {
        topological_entropy(psi, u, method, policy)
    } else {
        Err(Error::Inconclusive { budget: report.budget })
    };
    let (mut m, status) = match value.clone() {
        Ok(v) => {
            let mut m = Map::new();
            m.insert("status".into(), "certified".into());
            put_entropy(&mut m, "entropy", &v);
            (m, Status::Ok)
        }
        Err(e) => entry_error(e)?,
    };
    m.insert("cylinder".into(), cylinder_json(u));
    m.insert("indices".into(), ints(&report.indices()));
    m.insert("alphas".into(), ints(&report.alphas()));
    m.insert("n0".into(), report.n0.map_or(Value::Null, int));
    m.insert("n1".into(), report.n1.map_or(Value::Null, int));
    Ok(((m, status), value.ok()))
}

fn discrete(model: &Model, cmd: Command) -> Result<(&BandedEndo, &[FiniteSubgroup]), CliError> {
    match &model.side {
        Side::Discrete { endo, family } => Ok((endo, family)),
        Side::Compact { .. } => Err(incompatible(cmd, model.kind)),
    }
}

/// The compact pairs `(ψ, U)` an instance describes; bridge instances
/// contribute `(φ̂, F^⊥)`.
fn compact_pairs(model: &Model, cmd: Command) -> Result<Vec<(RowFiniteEndo, CylinderSubgroup)>, CliError> {
    match &model.side {
        Side::Compact { endo, cylinders, .. } => Ok(cylinders.iter().map(|u| (endo.clone(), u.clone())).collect()),
        Side::Discrete { endo, family } if model.kind == Kind::Bridge => family
            .iter()
            .map(|f| {
                bridge(endo, f)
                    .map(|b| (b.endo, b.cylinder))
                    .map_err(CliError::from_core)
            })
            .collect(),
        Side::Discrete { .. } => Err(incompatible(cmd, model.kind)),
    }
}

pub fn run_command(cmd: Command, model: &Model, opts: &Options) -> Result<Report, CliError> {
    let policy = &model.policy;
    let mut report = Report::new();
    report.insert("command", cmd.name());
    report.insert("kind", model.kind.name());
    report.insert("policy", policy_json(policy));
    match cmd {
        Command::AlgEntropy => {
            let (endo, family) = discrete(model, cmd)?;
            if opts.method == Method::Surjective {
                return Err(CliError::validation("the surjective method applies to compact instances only"));
            }
            report.insert("method", method_name(opts.method));
            let entries = par_map(family, opts.jobs, |f| alg_entry(endo, f, opts.method, policy));
            collect(&mut report, "subgroups", "h_alg", entries)?;
        }
        Command::TopEntropy => {
            let pairs = compact_pairs(model, cmd)?;
            report.insert("method", method_name(opts.method));
            let entries = par_map(&pairs, opts.jobs, |(psi, u)| top_entry(psi, u, opts.method, policy));
            collect(&mut report, "cylinders", "h_top", entries)?;
        }
        Command::BridgeCheck => {
            let (endo, family) = discrete(model, cmd)?;
            if !matches!(endo, BandedEndo::Abelian(_)) {
                return Err(CliError::validation("bridge-check needs abelian blocks"));
            }
            let entries = par_map(family, opts.jobs, |f| bridge_entry(endo, f, policy));
            let mut list = Vec::new();
            for e in entries {
                let (m, s) = e?;
                report.note(s);
                list.push(Value::Object(m));
            }
            report.insert("pairs", Value::Array(list));
        }
        Command::Depth => {
            let Side::Compact { endo, cylinders, .. } = &model.side else {
                return Err(incompatible(cmd, model.kind));
            };
            let (m, s) = depth_entry(endo, cylinders, policy, opts.jobs)?;
            report.note(s);
            report.insert("depth", Value::Object(m));
        }
        Command::Verify => verify(model, opts, &mut report)?,
    }
    Ok(report)
}

fn bridge_entry(endo: &BandedEndo, f: &FiniteSubgroup, policy: &StabilizationPolicy) -> Result<Entry, CliError> {
    let check = match weiss_bridge_check(endo, std::slice::from_ref(f), policy) {
        Ok(c) => c,
        Err(e) => return entry_error(e),
    };
    let pair = &check.pairs[0];
    let mut m = Map::new();
    let holds = pair.holds();
    m.insert("status".into(), if holds { "certified" } else { "violated" }.into());
    m.insert("order".into(), int(f.order()));
    put_entropy(&mut m, "h_alg", &pair.algebraic);
    put_entropy(&mut m, "h_top", &pair.topological);
    m.insert("steps_checked".into(), int(pair.checked));
    m.insert("cylinders_match".into(), pair.cylinders_match.into());
    m.insert("kernel_matches".into(), pair.kernel_matches.into());
    m.insert("quotient_matches".into(), pair.quotient_matches.into());
    m.insert("holds".into(), holds.into());
    Ok((m, if holds { Status::Ok } else { Status::Violated }))
}

fn depth_entry(
    endo: &RowFiniteEndo,
    cylinders: &[CylinderSubgroup],
    policy: &StabilizationPolicy,
    jobs: usize,
) -> Result<Entry, CliError> {
    let r = match depth_report_with_jobs(endo, cylinders, policy, jobs) {
        Ok(r) => r,
        Err(e) => return entry_error(e),
    };
    let mut m = Map::new();
    let holds = r.independent && r.h_top_is_log_depth && r.symmetric && r.mirror_indices_agree && r.exceeds_one != Some(false);
    m.insert("status".into(), if holds { "certified" } else { "violated" }.into());
    m.insert("depth".into(), int(&r.depth));
    m.insert("inverse_depth".into(), int(&r.inverse_depth));
    put_entropy(&mut m, "h_top", &r.h_top);
    let mut inv = Map::new();
    inv.insert("offset".into(), int(r.inverse.band().offset));
    inv.insert("width".into(), int(r.inverse.band().width));
    m.insert("inverse_band".into(), Value::Object(inv));
    m.insert("independent".into(), r.independent.into());
    m.insert("h_top_is_log_depth".into(), r.h_top_is_log_depth.into());
    m.insert("symmetric".into(), r.symmetric.into());
    m.insert("mirror_indices_agree".into(), r.mirror_indices_agree.into());
    m.insert("exceeds_one".into(), r.exceeds_one.map_or(Value::Null, Value::Bool));
    let candidates = r
        .candidates
        .iter()
        .map(|c| {
            let mut e = Map::new();
            e.insert("cylinder".into(), cylinder_json(&c.cylinder));
            e.insert("antistable".into(), c.antistability.is_antistable().map_or(Value::Null, Value::Bool));
            e.insert("certificate".into(), certificate(&c.antistability));
            e.insert("via_plus".into(), opt_int(c.via_plus.as_ref()));
            e.insert("via_minus".into(), opt_int(c.via_minus.as_ref()));
            Value::Object(e)
        })
        .collect();
    m.insert("candidates".into(), Value::Array(candidates));
    Ok((m, if holds { Status::Ok } else { Status::Violated }))
}

fn certificate(a: &Antistability) -> Value {
    let mut m = Map::new();
    match a {
        Antistability::Antistable { stage, steps, pinned } => {
            m.insert("kind".into(), "pinning".into());
            m.insert("stage".into(), int(stage));
            m.insert("steps".into(), int(steps));
            m.insert("pinned".into(), ints([&pinned.lo, &pinned.hi]));
        }
        Antistability::Exact { stage, trivial } => {
            m.insert("kind".into(), "fixed".into());
            m.insert("stage".into(), int(stage));
            m.insert("trivial".into(), (*trivial).into());
        }
        Antistability::Unknown { budget } => {
            m.insert("kind".into(), "unknown".into());
            m.insert("budget".into(), int(budget));
        }
    }
    Value::Object(m)
}

fn divides_chain(xs: &[BigUint]) -> bool {
    xs.windows(2).all(|w| !w[0].is_zero() && (&w[1] % &w[0]).is_zero())
}

fn checks_json(checks: &[(&str, bool)]) -> (Value, bool) {
    let mut m = Map::new();
    for (k, v) in checks {
        m.insert((*k).into(), (*v).into());
    }
    (Value::Object(m), checks.iter().all(|c| c.1))
}

/// `φ` on the window `W` as an endomorphism of `⊕_{i∈W} B_i`, coordinates
/// leaving `W` dropped.
fn window_endo(endo: &entropy_core::discrete::AbelianEndo, w: entropy_core::blocks::Window) -> Result<(entropy_core::blocks::Layout, Hom), Error> {
    let (src, dst, hom) = endo.window_hom(w)?;
    let mut rows = Vec::with_capacity(src.rank());
    for i in src.window.indices() {
        if dst.window.contains(i) {
            rows.extend(dst.block_range(i).map(|c| hom.matrix()[c].clone()));
        } else {
            rows.extend(src.block_range(i).map(|_| vec![0; src.rank()]));
        }
    }
    let f = Hom::new(rows, src.group(), src.group())?;
    Ok((src, f))
}

fn verify_discrete(endo: &BandedEndo, f: &FiniteSubgroup, policy: &StabilizationPolicy) -> Result<Entry, CliError> {
    let r = match endo.trajectory_limits(f, policy) {
        Ok(r) => r,
        Err(e) => return entry_error(e),
    };
    let mut m = Map::new();
    m.insert("order".into(), int(f.order()));
    trajectory_fields(&mut m, &r);
    if !r.certified {
        let (e, s) = entry_error(Error::Inconclusive { budget: r.budget })?;
        m.extend(e);
        return Ok((m, s));
    }
    let limit = r.limit_entropy().map_err(CliError::from_core)?;
    let limitfree = r.limitfree_entropy().map_err(CliError::from_core)?;
    let gap = r.gap_entropy().map_err(CliError::from_core)?;
    let kernel = r.ker_cap_t.clone().expect("certified");
    let mut alphas = r.alphas();
    alphas.reverse();
    let mut checks = vec![
        ("identities", r.steps.iter().all(|s| s.identities_hold)),
        ("orders_divide", divides_chain(&r.orders())),
        ("alphas_divide", divides_chain(&alphas)),
        ("formulas_agree", limit == limitfree),
        ("gap_is_kernel", gap == EntropyValue::log_ratio(&(r.alpha.clone().expect("certified") * &kernel), &BigUint::one())),
    ];
    put_entropy(&mut m, "entropy", &limit);
    let mut y = Map::new();
    put_entropy(&mut y, "gap", &gap);
    y.insert("kernel_order".into(), int(&kernel));
    y.insert("gap_expected".into(), (kernel > BigUint::one()).into());
    m.insert("yuzvinski".into(), Value::Object(y));
    if let (BandedEndo::Abelian(a), FiniteSubgroup::Abelian(fa)) = (endo, f) {
        let bridged = weiss_bridge_check(endo, std::slice::from_ref(f), policy).map_err(CliError::from_core)?;
        checks.push(("bridge", bridged.holds()));
        let t3 = match endo.trajectory(f, 3).map_err(CliError::from_core)? {
            FiniteSubgroup::Abelian(t) => t,
            FiniteSubgroup::Cayley(_) => unreachable!("abelian in, abelian out"),
        };
        let t2 = match endo.trajectory(f, 2).map_err(CliError::from_core)? {
            FiniteSubgroup::Abelian(t) => t,
            FiniteSubgroup::Cayley(_) => unreachable!("abelian in, abelian out"),
        };
        let w = t3.window().hull(&fa.window());
        if !w.is_empty() {
            let (layout, hom) = window_endo(a, w).map_err(CliError::from_core)?;
            let embed = |h: &entropy_core::discrete::WindowSubgroup| -> Result<AbSubgroup, CliError> {
                let gens: Vec<_> = h.subgroup().generators().iter().map(|g| h.layout().embed(g, &layout)).collect();
                AbSubgroup::generated(layout.group(), &gens).map_err(CliError::from_core)
            };
            let facts = verify_duality_facts(&hom, &embed(fa)?, &embed(&t2)?, 3).map_err(CliError::from_core)?;
            checks.push(("duality_facts", facts.all_hold()));
        }
    }
    let (c, ok) = checks_json(&checks);
    m.insert("checks".into(), c);
    Ok((m, if ok { Status::Ok } else { Status::Violated }))
}

fn verify_compact(psi: &RowFiniteEndo, u: &CylinderSubgroup, policy: &StabilizationPolicy) -> Result<Entry, CliError> {
    let r = match psi.cotrajectory_limits(u, policy) {
        Ok(r) => r,
        Err(e) => return entry_error(e),
    };
    let mut m = Map::new();
    m.insert("cylinder".into(), cylinder_json(u));
    m.insert("indices".into(), ints(&r.indices()));
    m.insert("alphas".into(), ints(&r.alphas()));
    if !r.certified {
        let (e, s) = entry_error(Error::Inconclusive { budget: r.budget })?;
        m.extend(e);
        return Ok((m, s));
    }
    let limit = r.limit_entropy().map_err(CliError::from_core)?;
    let limitfree = r.limitfree_entropy().map_err(CliError::from_core)?;
    let mut alphas = r.alphas();
    alphas.reverse();
    let qs = quotient_system(psi, u, policy).map_err(CliError::from_core)?;
    let mut checks = vec![
        ("identities", r.steps.iter().all(|s| s.identities_hold)),
        ("indices_divide", divides_chain(&r.indices())),
        ("alphas_divide", divides_chain(&alphas)),
        ("formulas_agree", limit == limitfree),
        ("quotient_system", qs.agrees),
    ];
    put_entropy(&mut m, "entropy", &limit);
    let surjective = psi.check_surjective(psi.surjectivity_probe()).is_ok();
    m.insert("surjective".into(), surjective.into());
    if surjective {
        let s = r.surjective_entropy().map_err(CliError::from_core)?;
        checks.push(("surjective_formula", s == limit));
        let mut laws = true;
        for k in 2..=3 {
            let law = log_law_check(psi, u, k, policy).map_err(CliError::from_core)?;
            laws &= law.index_law_holds && law.entropy_law_holds;
        }
        checks.push(("log_law", laws));
    }
    let (c, ok) = checks_json(&checks);
    m.insert("checks".into(), c);
    Ok((m, if ok { Status::Ok } else { Status::Violated }))
}

fn verify(model: &Model, opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let policy = &model.policy;
    let push = |report: &mut Report, key: &str, entries: Vec<Result<Entry, CliError>>| -> Result<(), CliError> {
        let mut list = Vec::new();
        for e in entries {
            let (m, s) = e?;
            report.note(s);
            list.push(Value::Object(m));
        }
        report.insert(key, Value::Array(list));
        Ok(())
    };
    match &model.side {
        Side::Discrete { endo, family } => {
            let entries = par_map(family, opts.jobs, |f| verify_discrete(endo, f, policy));
            push(report, "subgroups", entries)?;
        }
        Side::Compact { endo, cylinders, .. } => {
            let entries = par_map(cylinders, opts.jobs, |u| verify_compact(endo, u, policy));
            push(report, "cylinders", entries)?;
            let kc = kernel_cokernel_orders(endo, policy).map_err(CliError::from_core)?;
            let mut k = Map::new();
            k.insert("kernel".into(), opt_int(kc.kernel.as_ref()));
            k.insert("cokernel".into(), opt_int(kc.cokernel.as_ref()));
            report.insert("kernel_cokernel", Value::Object(k));
            if model.kind == Kind::Depth {
                let (m, s) = depth_entry(endo, cylinders, policy, opts.jobs)?;
                report.note(s);
                report.insert("depth", Value::Object(m));
            }
        }
    }
    let verified = report.status == Status::Ok;
    report.insert("verified", verified);
    Ok(())
}
