use std::fs::File;
use std::io::BufWriter;

use hypregen::charvar::{chi0, trace_curve, write_curve_csv, Character, CharvarError};
use hypregen::earthquake::{
    earthquake_length, fd_first_derivative, fd_second_derivative, first_derivative, intersection_number,
    second_derivative, EarthquakeConfig, EarthquakeError,
};
use hypregen::format::{array17, num17};
use hypregen::hyp2::{ExtendedComplex, HPoint};
use hypregen::minimizer::{
    criticality_report, optimize_oracle, solve_incircle, solve_weighted, verify_characterization,
    MinimizerError, OracleOptions,
};
use hypregen::polygon::{
    close_with, perimeter, w_perimeter, AngleSpec, ClosingOptions, Polygon, PolygonError, WeightSpec,
};
use hypregen::sl2kit::{
    check_killing_distance, check_parabolic_loxodromic, check_two_parabolics, classify, complex_distance,
    identity_battery, killing_form, AxisData, Sl2Element, Sl2Error,
};
use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::{Cli, CliError, Command, Mode};

/// Agreement threshold for the min-polygon cross table.
const AGREEMENT_TOL: f64 = 1e-6;
/// Largest trace accepted as zero by `killing`.
const TRACELESS_TOL: f64 = 1e-10;
/// Pass threshold for the battery residuals and the Whitehead summary.
const RESIDUAL_TOL: f64 = 1e-8;
/// Finite-difference steps and pass thresholds for `earthquake --check`.
const FD_STEP_FIRST: f64 = 1e-5;
const FD_STEP_SECOND: f64 = 1e-3;
const FIRST_TOL: f64 = 1e-6;
const SECOND_TOL: f64 = 1e-4;

pub fn run(cli: &Cli) -> Result<Value, CliError> {
    match &cli.command {
        Command::MinPolygon {
            angles,
            weights,
            mode,
            allow_obtuse,
        } => min_polygon(cli, angles, weights.as_deref(), *mode, *allow_obtuse),
        Command::Earthquake { config, t, check } => earthquake(cli, config, *t, *check),
        Command::Killing { a, b, t, suite, trials } => killing(cli, a.as_deref(), b.as_deref(), *t, *suite, *trials),
        Command::Whitehead {
            n,
            alpha_lo,
            alpha_hi,
            steps,
            csv,
        } => whitehead(cli, *n, *alpha_lo, *alpha_hi, *steps, csv),
        Command::PolygonClose { angles, free, guess } => polygon_close(cli, angles, free, guess),
    }
}

fn parse_list(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::input("parse_error", format!("--{name}: cannot read '{}' as a number", x.trim())))
        })
        .collect()
}

fn polygon_error(e: PolygonError) -> CliError {
    let msg = e.to_string();
    match e {
        PolygonError::TooFewVertices(_) => CliError::input("too_few_vertices", msg),
        PolygonError::AngleOutOfRange { .. } => CliError::input("angle_out_of_range", msg),
        PolygonError::NotStrict { .. } => CliError::input("angle_above_right", msg),
        PolygonError::NotHyperbolic { .. } => CliError::input("not_hyperbolic", msg),
        PolygonError::NonPositiveWeight { .. } => CliError::input("bad_weight", msg),
        PolygonError::LengthMismatch { .. } => CliError::input("length_mismatch", msg),
        PolygonError::NonPositiveLength { .. } => CliError::input("bad_length", msg),
        PolygonError::Json(_) => CliError::input("malformed_polygon", msg),
        PolygonError::NoConvergence { .. } => CliError::numeric("no_convergence", msg),
        PolygonError::DegenerateLength { .. } => CliError::numeric("degenerate_length", msg),
        PolygonError::IllConditioned => CliError::numeric("ill_conditioned", msg),
        PolygonError::NonConvex => CliError::numeric("non_convex", msg),
        PolygonError::AngleMismatch { .. } => CliError::numeric("angle_mismatch", msg),
        PolygonError::PointOutside => CliError::numeric("point_outside", msg),
    }
}

fn minimizer_error(e: MinimizerError) -> CliError {
    let msg = e.to_string();
    match e {
        MinimizerError::AngleAbovePiOver2 { .. } => CliError::input("angle_above_right", msg),
        MinimizerError::WeightMismatch { .. } => CliError::input("weight_mismatch", msg),
        MinimizerError::NoIncircle => CliError::input("not_hyperbolic", msg),
        MinimizerError::NoScaleBracket => CliError::numeric("no_scale_bracket", msg),
        MinimizerError::NoFeasibleStart { .. } => CliError::numeric("no_feasible_start", msg),
        MinimizerError::Probe(_) => CliError::numeric("probe_failed", msg),
        MinimizerError::Polygon(p) => polygon_error(p),
    }
}

fn point_json(p: HPoint) -> Value {
    json!([num17(p.x), num17(p.y)])
}

/// Fields shared by every min-polygon method.
fn polygon_summary(spec: &AngleSpec, p: &Polygon, w: &WeightSpec) -> Result<Map<String, Value>, CliError> {
    let crit = criticality_report(spec, p, w).map_err(minimizer_error)?;
    let charac = verify_characterization(p, w).map_err(minimizer_error)?;
    let mut m = Map::new();
    m.insert("polygon".into(), p.to_json());
    m.insert("perimeter".into(), num17(perimeter(p)));
    m.insert("w_perimeter".into(), num17(w_perimeter(p, w).map_err(polygon_error)?));
    m.insert(
        "characterization".into(),
        json!({
            "spread": num17(charac.spread),
            "point": point_json(charac.point),
            "ratios": array17(&charac.ratios),
        }),
    );
    m.insert(
        "criticality".into(),
        json!({
            "gradient_norm": num17(crit.gradient_norm),
            "min_eigenvalue": num17(crit.min_eigenvalue),
            "asymmetry": num17(crit.asymmetry),
        }),
    );
    Ok(m)
}

fn min_polygon(
    cli: &Cli,
    angles: &str,
    weights: Option<&str>,
    mode: Mode,
    allow_obtuse: bool,
) -> Result<Value, CliError> {
    let angles = parse_list("angles", angles)?;
    let spec = if allow_obtuse {
        AngleSpec::new(angles)
    } else {
        AngleSpec::strict(angles)
    }
    .map_err(polygon_error)?;
    let n = spec.len();
    let w = match weights {
        Some(s) => {
            let ws = parse_list("weights", s)?;
            if ws.len() != n {
                return Err(CliError::input(
                    "weight_mismatch",
                    format!("weight count {} does not match {n} angles", ws.len()),
                ));
            }
            WeightSpec::new(ws).map_err(polygon_error)?
        }
        None => WeightSpec::uniform(n),
    };
    let uniform = w.weights().iter().all(|&x| x == w.weights()[0]);
    let obtuse = !spec.within_right_angles();
    if obtuse && matches!(mode, Mode::Incircle | Mode::Weighted) {
        return Err(CliError::input(
            "angle_above_right",
            "incircle and weighted modes need every angle at most pi/2",
        ));
    }
    if mode == Mode::Incircle && !uniform {
        return Err(CliError::input(
            "weights_unsupported",
            "incircle mode minimizes the unweighted perimeter; use weighted or oracle",
        ));
    }

    let run_incircle = !obtuse && uniform && matches!(mode, Mode::Incircle | Mode::All);
    let run_weighted = !obtuse && matches!(mode, Mode::Weighted | Mode::All);
    let run_oracle = matches!(mode, Mode::Oracle | Mode::All);

    let mut methods = Map::new();
    let mut edges: Vec<(&str, Vec<f64>, f64)> = Vec::new();
    if run_incircle {
        let sol = solve_incircle(&spec).map_err(minimizer_error)?;
        let mut m = polygon_summary(&spec, &sol.polygon, &w)?;
        m.insert("r".into(), num17(sol.r));
        m.insert("center".into(), point_json(sol.center));
        edges.push(("incircle", sol.polygon.edge_lengths().to_vec(), w_perimeter(&sol.polygon, &w).unwrap()));
        methods.insert("incircle".into(), Value::Object(m));
    }
    if run_weighted {
        let sol = solve_weighted(&spec, &w).map_err(minimizer_error)?;
        let mut m = polygon_summary(&spec, &sol.polygon, &w)?;
        m.insert("c".into(), num17(sol.c));
        m.insert("distances".into(), array17(&sol.distances));
        m.insert("center".into(), point_json(sol.center));
        edges.push(("weighted", sol.polygon.edge_lengths().to_vec(), w_perimeter(&sol.polygon, &w).unwrap()));
        methods.insert("weighted".into(), Value::Object(m));
    }
    if run_oracle {
        let opts = OracleOptions {
            seed: cli.seed,
            ..OracleOptions::default()
        };
        let res = optimize_oracle(&spec, &w, &opts).map_err(minimizer_error)?;
        let mut m = polygon_summary(&spec, &res.polygon, &w)?;
        m.insert("objective".into(), num17(res.objective));
        m.insert("successful_starts".into(), json!(res.successful_starts));
        m.insert("attempts".into(), json!(res.attempts));
        edges.push(("oracle", res.polygon.edge_lengths().to_vec(), res.objective));
        methods.insert("oracle".into(), Value::Object(m));
    }

    let mut report = Map::new();
    report.insert("command".into(), json!("min-polygon"));
    report.insert("angles".into(), array17(spec.angles()));
    report.insert("weights".into(), array17(w.weights()));
    report.insert("seed".into(), json!(cli.seed));
    report.insert("methods".into(), Value::Object(methods));
    if mode == Mode::All {
        let tol = cli.tol.unwrap_or(AGREEMENT_TOL);
        let mut table = Vec::new();
        let mut all_ok = true;
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let (a, la, pa) = &edges[i];
                let (b, lb, pb) = &edges[j];
                let dp = (pa - pb).abs();
                let dl = la.iter().zip(lb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                let ok = dp <= tol * pa.abs().max(1.0);
                all_ok &= ok;
                table.push(json!({
                    "methods": [a, b],
                    "w_perimeter_difference": num17(dp),
                    "max_edge_difference": num17(dl),
                    "agree": ok,
                }));
            }
        }
        report.insert("tolerance".into(), num17(tol));
        report.insert("agreement".into(), Value::Array(table));
        report.insert("all_agree".into(), json!(all_ok));
    }
    Ok(Value::Object(report))
}

fn earthquake_error(e: EarthquakeError) -> CliError {
    let msg = e.to_string();
    match e {
        EarthquakeError::NotDisjoint(i, j) => {
            CliError::input("faults_not_disjoint", format!("faults not disjoint: components {i} and {j}"))
        }
        EarthquakeError::Tangent { .. } | EarthquakeError::NearTangent { .. } => CliError::numeric("tangent_crossing", msg),
        EarthquakeError::NonPositiveWeight { .. } => CliError::input("bad_weight", msg),
        EarthquakeError::OutOfRange(_) => CliError::input("shear_out_of_range", msg),
        EarthquakeError::Json(_) | EarthquakeError::Geometry(_) => CliError::input("malformed_config", msg),
        EarthquakeError::NoCrossing | EarthquakeError::Empty => CliError::input("no_crossing", msg),
    }
}

fn residual_entry(closed: f64, fd: f64, tol: f64) -> Value {
    let residual = (closed - fd).abs();
    json!({
        "closed_form": num17(closed),
        "finite_difference": num17(fd),
        "residual": num17(residual),
        "pass": residual <= tol * closed.abs().max(1.0),
    })
}

fn earthquake(cli: &Cli, path: &std::path::Path, t: Option<f64>, check: bool) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input("io_error", format!("{}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| CliError::input("malformed_config", format!("invalid JSON: {e}")))?;
    let cfg = EarthquakeConfig::from_json(&v).map_err(earthquake_error)?;
    let len0 = cfg.sigma.length();
    let crossings: Vec<Value> = cfg
        .crossings
        .iter()
        .map(|(c, m)| {
            json!({
                "point": point_json(c.point),
                "theta": num17(c.theta),
                "s_minus": num17(c.s_minus),
                "s_plus": num17(c.s_plus),
                "weight": num17(*m),
            })
        })
        .collect();
    let mut report = Map::new();
    report.insert("command".into(), json!("earthquake"));
    report.insert("length".into(), num17(len0));
    report.insert("intersection_number".into(), num17(intersection_number(&cfg)));
    report.insert("crossings".into(), Value::Array(crossings));
    if let Some(t) = t {
        let lt = earthquake_length(&cfg, t).map_err(earthquake_error)?;
        report.insert("t".into(), num17(t));
        report.insert("length_at_t".into(), num17(lt));
    }
    if check {
        let fd1 = fd_first_derivative(&cfg, FD_STEP_FIRST).map_err(earthquake_error)?;
        let fd2 = fd_second_derivative(&cfg, FD_STEP_SECOND).map_err(earthquake_error)?;
        let (tol1, tol2) = match cli.tol {
            Some(tol) => (tol, tol),
            None => (FIRST_TOL, SECOND_TOL),
        };
        report.insert(
            "check".into(),
            json!({
                "first": residual_entry(first_derivative(&cfg), fd1, tol1),
                "second": residual_entry(second_derivative(&cfg), fd2, tol2),
            }),
        );
    }
    Ok(Value::Object(report))
}

fn complex_json(z: C) -> Value {
    json!([num17(z.re), num17(z.im)])
}

fn boundary_json(p: ExtendedComplex) -> Value {
    match p.value() {
        Some(z) => complex_json(z),
        None => json!("inf"),
    }
}

fn parse_entry(v: &Value) -> Option<C> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| C::new(x, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(C::new(a[0].as_f64()?, a[1].as_f64()?)),
        _ => None,
    }
}

fn parse_matrix(name: &str, s: &str) -> Result<Sl2Element, CliError> {
    let bad = || CliError::input("malformed_matrix", format!("--{name}: expected [[a, b], [c, d]] with number or [re, im] entries"));
    let v: Value = serde_json::from_str(s).map_err(|_| bad())?;
    let rows = v.as_array().filter(|r| r.len() == 2).ok_or_else(bad)?;
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == 2).ok_or_else(bad)?;
        for (j, e) in row.iter().enumerate() {
            m[i][j] = parse_entry(e).filter(|z| z.re.is_finite() && z.im.is_finite()).ok_or_else(bad)?;
        }
    }
    Sl2Element::from_matrix(m, TRACELESS_TOL).map_err(|e| match e {
        Sl2Error::NotTraceless(tr) => CliError::input(
            "not_traceless",
            format!("--{name}: trace {} + {}i is not zero", tr.re, tr.im),
        ),
        other => CliError::input("malformed_matrix", other.to_string()),
    })
}

fn classification_json(u: &Sl2Element) -> Value {
    match classify(u) {
        AxisData::Axis { p_minus, p_plus } => json!({
            "type": "axis",
            "p_minus": boundary_json(p_minus),
            "p_plus": boundary_json(p_plus),
        }),
        AxisData::Parabolic { fixed } => json!({"type": "parabolic", "fixed": boundary_json(fixed)}),
        AxisData::Zero => json!({"type": "zero"}),
    }
}

fn opt17(x: Option<f64>) -> Value {
    x.map(num17).unwrap_or(Value::Null)
}

fn identities(u: &Sl2Element, v: &Sl2Element, t: f64) -> Value {
    let err = |e: Sl2Error| json!({"error": e.to_string()});
    match (classify(u), classify(v)) {
        (AxisData::Axis { .. }, AxisData::Axis { .. }) => {
            let (au, av) = (classify(u).axis().unwrap(), classify(v).axis().unwrap());
            let b = killing_form(u, v);
            let ratio = b * b / (killing_form(u, u) * killing_form(v, v));
            let mut out = json!({"killing_ratio": complex_json(ratio)});
            match complex_distance(&au, &av) {
                Ok(d) => {
                    let ch = d.cosh();
                    out["complex_distance"] = complex_json(d.value());
                    out["cosh_squared"] = complex_json(ch * ch);
                }
                Err(e) => out["complex_distance"] = err(e),
            }
            out["killing_distance_residual"] = match check_killing_distance(u, v) {
                Ok(r) => num17(r),
                Err(e) => err(e),
            };
            out
        }
        (AxisData::Parabolic { .. }, AxisData::Axis { .. }) => match check_parabolic_loxodromic(u, v, t) {
            Ok(c) => json!({"parabolic_loxodromic": {
                "t": num17(t),
                "pairing": complex_json(c.pairing),
                "endpoint_agreement": c.endpoint_agreement,
                "residual": opt17(c.residual),
            }}),
            Err(e) => err(e),
        },
        (AxisData::Axis { .. }, AxisData::Parabolic { .. }) => match check_parabolic_loxodromic(v, u, t) {
            Ok(c) => json!({"parabolic_loxodromic": {
                "t": num17(t),
                "pairing": complex_json(c.pairing),
                "endpoint_agreement": c.endpoint_agreement,
                "residual": opt17(c.residual),
            }}),
            Err(e) => err(e),
        },
        (AxisData::Parabolic { .. }, AxisData::Parabolic { .. }) => match check_two_parabolics(u, v, t) {
            Ok(c) => json!({"two_parabolics": {
                "t": num17(t),
                "pairing": complex_json(c.pairing),
                "fixed_point_agreement": c.fixed_point_agreement,
                "swapped_residual": opt17(c.swapped_residual),
                "printed_residual": opt17(c.printed_residual),
            }}),
            Err(e) => err(e),
        },
        _ => json!({}),
    }
}

fn killing(
    cli: &Cli,
    a: Option<&str>,
    b: Option<&str>,
    t: f64,
    suite: bool,
    trials: usize,
) -> Result<Value, CliError> {
    if !suite && (a.is_none() || b.is_none()) {
        return Err(CliError::input("missing_matrix", "give both --a and --b, or --suite"));
    }
    if a.is_some() != b.is_some() {
        return Err(CliError::input("missing_matrix", "--a and --b must be given together"));
    }
    let mut report = Map::new();
    report.insert("command".into(), json!("killing"));
    if let (Some(a), Some(b)) = (a, b) {
        let (u, v) = (parse_matrix("a", a)?, parse_matrix("b", b)?);
        report.insert("killing_form".into(), complex_json(killing_form(&u, &v)));
        report.insert("killing_aa".into(), complex_json(killing_form(&u, &u)));
        report.insert("killing_bb".into(), complex_json(killing_form(&v, &v)));
        report.insert("classification".into(), json!({"a": classification_json(&u), "b": classification_json(&v)}));
        report.insert("identities".into(), identities(&u, &v, t));
    }
    if suite {
        if trials == 0 {
            return Err(CliError::input("bad_trials", "--trials must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
        let rep = identity_battery(&mut rng, trials).map_err(|e| CliError::numeric("battery_failed", e.to_string()))?;
        let tol = cli.tol.unwrap_or(RESIDUAL_TOL);
        let max_residual = [
            rep.killing_distance,
            rep.oriented_rotations,
            rep.parabolic_loxodromic,
            rep.two_parabolics_swapped,
            rep.ad_invariance,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        report.insert(
            "suite".into(),
            json!({
                "seed": cli.seed,
                "trials": rep.trials,
                "killing_distance": num17(rep.killing_distance),
                "oriented_rotations": num17(rep.oriented_rotations),
                "parabolic_loxodromic": num17(rep.parabolic_loxodromic),
                "two_parabolics_swapped": num17(rep.two_parabolics_swapped),
                "two_parabolics_printed_min": num17(rep.two_parabolics_printed_min),
                "ad_invariance": num17(rep.ad_invariance),
                "characterizations_agree": rep.characterizations_agree,
                "max_residual": num17(max_residual),
                "tolerance": num17(tol),
                "pass": max_residual < tol && rep.characterizations_agree,
            }),
        );
    }
    Ok(Value::Object(report))
}

fn charvar_error(e: CharvarError) -> CliError {
    let msg = e.to_string();
    match e {
        CharvarError::SmallN(n) => CliError::input("n_too_small", format!("n = {n}: n > 4 required")),
        CharvarError::TooFewSteps(s) => CliError::input("too_few_steps", format!("steps ≥ 2 required, got {s}")),
        CharvarError::RangeMissesPi { .. } => CliError::input("range_misses_pi", msg),
        CharvarError::Reducible(_) => CliError::numeric("reducible", msg),
        CharvarError::BranchCollision { .. } => CliError::numeric("branch_collision", msg),
        CharvarError::Csv(_) => CliError::input("io_error", msg),
    }
}

fn character_json(ch: &Character) -> Value {
    json!({"x": complex_json(ch.x), "y": complex_json(ch.y), "z": complex_json(ch.z)})
}

fn whitehead(
    cli: &Cli,
    n: i64,
    lo: f64,
    hi: f64,
    steps: usize,
    csv: &std::path::Path,
) -> Result<Value, CliError> {
    if n <= 4 {
        return Err(charvar_error(CharvarError::SmallN(n)));
    }
    if steps < 2 {
        return Err(charvar_error(CharvarError::TooFewSteps(steps)));
    }
    let points = trace_curve(n, lo, hi, steps).map_err(charvar_error)?;
    let file = File::create(csv).map_err(|e| CliError::input("io_error", format!("{}: {e}", csv.display())))?;
    write_curve_csv(BufWriter::new(file), &points).map_err(charvar_error)?;
    let max_p = points.iter().map(|p| p.on_p).fold(0.0, f64::max);
    let max_defect = points.iter().map(|p| p.relator_defect).fold(0.0, f64::max);
    let tol = cli.tol.unwrap_or(RESIDUAL_TOL);
    Ok(json!({
        "command": "whitehead",
        "n": n,
        "alpha_lo": num17(lo),
        "alpha_hi": num17(hi),
        "steps": steps,
        "rows": points.len(),
        "csv": csv.display().to_string(),
        "chi0": character_json(&chi0(n).map_err(charvar_error)?),
        "max_abs_p": num17(max_p),
        "max_relator_defect": num17(max_defect),
        "tolerance": num17(tol),
        "pass": max_p < tol && max_defect < tol,
    }))
}

fn polygon_close(cli: &Cli, angles: &str, free: &str, guess: &str) -> Result<Value, CliError> {
    let spec = AngleSpec::new(parse_list("angles", angles)?).map_err(polygon_error)?;
    let free = parse_list("free", free)?;
    let g = parse_list("guess", guess)?;
    let guess: [f64; 3] = g
        .as_slice()
        .try_into()
        .map_err(|_| CliError::input("length_mismatch", format!("--guess needs 3 values, got {}", g.len())))?;
    let mut opts = ClosingOptions::default();
    if let Some(tol) = cli.tol {
        opts.tol = tol;
    }
    let p = close_with(&spec, &free, guess, &opts).map_err(polygon_error)?;
    Ok(json!({
        "command": "polygon-close",
        "polygon": p.to_json(),
        "perimeter": num17(perimeter(&p)),
        "area": num17(spec.area()),
    }))
}
