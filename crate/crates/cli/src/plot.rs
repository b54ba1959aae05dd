//! Static SVG line charts, written by hand: a log-scale panel per figure.

use std::fmt::Write as _;
use std::path::PathBuf;

use hcschwartz::{AdaptiveXi, Bundle, Error, GridXi, Result, RunConfig, XiEvaluator, XiMethod};

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn svg_chart(title: &str, xlabel: &str, ylabel: &str, log_y: bool, series: &[Series]) -> String {
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(x, y)| (x, ty(y))))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (x, y) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let ylab = if log_y {
            format!("1e{y:.1}")
        } else {
            format!("{y:.3}")
        };
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{x:.2}</text>"#,
            sx(x),
            H - MARGIN + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{ylab}</text>"#,
            MARGIN - 4.0,
            sy(y) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| (x, ty(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            W - MARGIN - 8.0 - 7.0 * ser.label.len() as f64,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xi_decay(cfg: &RunConfig) -> Result<String> {
    let n = match cfg.n {
        Some(n) => n,
        None => cfg.presentation()?.dim(),
    };
    let xi: Box<dyn XiEvaluator> = if n == 2 {
        Box::new(AdaptiveXi::default())
    } else {
        Box::new(GridXi::new(
            hcschwartz::BoundaryGrid::new(3, ((cfg.grid as f64).cbrt().ceil() as usize).max(8))?,
            XiMethod::Boundary,
        ))
    };
    let steps = 200;
    let mut xs = Vec::new();
    let mut env = Vec::new();
    let mut env_poly = Vec::new();
    for k in 0..=steps {
        let t = cfg.cutoff * k as f64 / steps as f64;
        let mut h = vec![0.0; n];
        h[0] = 0.5 * t;
        h[n - 1] = -0.5 * t;
        let g = hcschwartz::GroupElement::exp_diagonal(&h);
        // rho(H) for H = t/2 (e_1 - e_n) is (n-1) t / 2.
        let rho = 0.5 * t * (n - 1) as f64;
        let l = t / std::f64::consts::SQRT_2;
        xs.push((t, xi.at_element(&g)?));
        env.push((t, (-rho).exp()));
        env_poly.push((t, (-rho).exp() * (1.0 + l)));
    }
    Ok(svg_chart(
        &format!("Xi(a_t) on SL({n},R)"),
        "t",
        "value",
        true,
        &[
            Series {
                label: "Xi(a_t)".into(),
                points: xs,
            },
            Series {
                label: "exp(-rho)".into(),
                points: env,
            },
            Series {
                label: "exp(-rho)(1+L)".into(),
                points: env_poly,
            },
        ],
    ))
}

/// Xi decay, plus one chart per report table with a `ratio` or `max_ratio`
/// column when `out/report.json` exists.
pub fn write_plots(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out)?;
    let mut written = Vec::new();
    let path = cfg.out.join("xi-decay.svg");
    std::fs::write(&path, xi_decay(cfg)?)?;
    written.push(path);

    let report = cfg.out.join("report.json");
    if report.exists() {
        let bundle: Bundle = serde_json::from_str(&std::fs::read_to_string(&report)?)
            .map_err(|e| Error::Io(format!("{}: {e}", report.display())))?;
        for r in &bundle.reports {
            for (name, table) in &r.tables {
                let Some(col) = ["ratio", "max_ratio"]
                    .iter()
                    .find_map(|c| table.column(c).map(|v| (*c, v)))
                else {
                    continue;
                };
                let points: Vec<(f64, f64)> = col
                    .1
                    .iter()
                    .enumerate()
                    .map(|(i, &y)| (i as f64, y))
                    .collect();
                let svg = svg_chart(
                    &format!("{} / {name}", r.statement_id),
                    "row",
                    col.0,
                    false,
                    &[Series {
                        label: col.0.into(),
                        points,
                    }],
                );
                let path = cfg.out.join(format!("{}-{name}.svg", r.statement_id));
                std::fs::write(&path, svg)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
