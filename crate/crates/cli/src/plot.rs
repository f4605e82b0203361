//! Self-contained SVG 1.1 plots with inline styles.

use std::fmt::Write;

use specdamp_core::krein::SignType;

use crate::report::{Bundle, Simulation};

const SIZE: f64 = 640.0;
const PAD: f64 = 64.0;

fn sign_color(s: SignType) -> &'static str {
    match s {
        SignType::Positive => "#1f77b4",
        SignType::Negative => "#d62728",
        SignType::Neutral => "#7f7f7f",
        SignType::Mixed => "#ff7f0e",
    }
}

/// `sign(x)·log10(1 + |x|)`, so that decades stay readable and zero stays put.
fn slog(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p() / std::f64::consts::LN_10
}

fn header(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{SIZE}\" height=\"{SIZE}\" style=\"fill:#ffffff\"/>\n\
         <text x=\"{}\" y=\"24\" style=\"font-family:sans-serif;font-size:15px;text-anchor:middle\">{title}</text>\n",
        SIZE / 2.0
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Eigenvalues in the complex plane on signed-log axes, colored by sign
/// type, with the lower-bound circle and the predicted accumulation points.
pub fn spectrum_svg(bundle: &Bundle) -> String {
    let values = bundle.spectrum.eigenvalues();
    let bound = bundle.spectrum.bound.value;
    let points = bundle.beam.as_ref().map(|b| b.accumulation_points()).unwrap_or_default();
    let extent = values
        .iter()
        .flat_map(|z| [z.re.abs(), z.im.abs()])
        .chain(points.iter().map(|p| p.abs()))
        .chain([bound, 1.0])
        .filter(|x| x.is_finite())
        .fold(0.0, f64::max);
    let r = slog(extent) * 1.05;
    let scale = (SIZE - 2.0 * PAD) / (2.0 * r);
    let px = |x: f64| SIZE / 2.0 + slog(x) * scale;
    let py = |y: f64| SIZE / 2.0 - slog(y) * scale;

    let mut s = header("spectrum (signed log10 axes)");
    let _ = writeln!(
        s,
        "<line x1=\"{PAD}\" y1=\"{c}\" x2=\"{e}\" y2=\"{c}\" style=\"stroke:#000000;stroke-width:1\"/>\n\
         <line x1=\"{c}\" y1=\"{PAD}\" x2=\"{c}\" y2=\"{e}\" style=\"stroke:#000000;stroke-width:1\"/>",
        c = SIZE / 2.0,
        e = SIZE - PAD
    );
    let decades = extent.log10().floor().max(0.0) as i32;
    for k in 0..=decades {
        let v = 10f64.powi(k);
        for sign in [-1.0, 1.0] {
            let (x, y) = (px(sign * v), py(sign * v));
            let _ = writeln!(
                s,
                "<line x1=\"{x:.2}\" y1=\"{a:.2}\" x2=\"{x:.2}\" y2=\"{b:.2}\" style=\"stroke:#000000\"/>\
                 <text x=\"{x:.2}\" y=\"{t:.2}\" style=\"font-family:sans-serif;font-size:10px;text-anchor:middle\">{lbl}</text>\n\
                 <line x1=\"{a:.2}\" y1=\"{y:.2}\" x2=\"{b:.2}\" y2=\"{y:.2}\" style=\"stroke:#000000\"/>\
                 <text x=\"{u:.2}\" y=\"{y:.2}\" style=\"font-family:sans-serif;font-size:10px;text-anchor:end\">{lbl}i</text>",
                a = SIZE / 2.0 - 3.0,
                b = SIZE / 2.0 + 3.0,
                t = SIZE / 2.0 + 14.0,
                u = SIZE / 2.0 - 5.0,
                lbl = sign * v
            );
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" style=\"font-family:sans-serif;font-size:12px\">Re λ</text>\
         <text x=\"{}\" y=\"{}\" style=\"font-family:sans-serif;font-size:12px\">Im λ</text>",
        SIZE - PAD + 4.0,
        SIZE / 2.0 + 4.0,
        SIZE / 2.0 + 6.0,
        PAD - 6.0
    );

    let circle: Vec<String> = (0..=360)
        .map(|k| {
            let t = (k as f64).to_radians();
            format!("{:.2},{:.2}", px(bound * t.cos()), py(bound * t.sin()))
        })
        .collect();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" style=\"fill:none;stroke:#2ca02c;stroke-width:1.2;stroke-dasharray:5,4\"/>",
        circle.join(" ")
    );
    for p in &points {
        let (x, y) = (px(*p), py(0.0));
        let _ = writeln!(
            s,
            "<path d=\"M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}\" style=\"stroke:#9467bd;stroke-width:2\"/>\
             <text x=\"{x:.2}\" y=\"{:.2}\" style=\"font-family:sans-serif;font-size:10px;fill:#9467bd;text-anchor:middle\">{}</text>",
            x - 6.0,
            y - 6.0,
            x + 6.0,
            y + 6.0,
            x - 6.0,
            y + 6.0,
            x + 6.0,
            y - 6.0,
            y - 10.0,
            escape(&format!("−E/a = {p:.4}"))
        );
    }
    for (i, z) in values.iter().enumerate() {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" style=\"fill:{};fill-opacity:0.85;stroke:none\"/>",
            px(z.re),
            py(z.im),
            sign_color(bundle.signs.sign_of(i))
        );
    }

    let legend = [
        ("positive type", sign_color(SignType::Positive)),
        ("negative type", sign_color(SignType::Negative)),
        ("neutral", sign_color(SignType::Neutral)),
        ("mixed", sign_color(SignType::Mixed)),
    ];
    for (k, (label, color)) in legend.iter().enumerate() {
        let y = 44.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            "<circle cx=\"20\" cy=\"{y}\" r=\"4\" style=\"fill:{color}\"/>\
             <text x=\"30\" y=\"{}\" style=\"font-family:sans-serif;font-size:11px\">{label}</text>",
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{}\" style=\"font-family:sans-serif;font-size:11px;fill:#2ca02c\">|λ| = {bound:.6}</text>",
        44.0 + 16.0 * 4.0 + 4.0
    );
    s.push_str("</svg>\n");
    s
}

/// Energy against time, log scale when the energy stays positive.
pub fn energy_svg(sim: &Simulation) -> String {
    let tr = &sim.trajectory;
    let e_max = tr.energies.iter().copied().fold(0.0, f64::max);
    let log = e_max > 0.0;
    let floor = e_max * 1e-16;
    let f = |e: f64| if log { e.max(floor).log10() } else { e };
    let ys: Vec<f64> = tr.energies.iter().map(|&e| f(e)).collect();
    let (mut lo, mut hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let t_end = tr.times.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let w = SIZE - 2.0 * PAD;
    let px = |t: f64| PAD + t / t_end * w;
    let py = |y: f64| SIZE - PAD - (y - lo) / (hi - lo) * w;

    let mut s = header(&format!("energy ({})", tr.method.as_str()));
    let _ = writeln!(
        s,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{w}\" height=\"{w}\" style=\"fill:none;stroke:#000000\"/>\n\
         <text x=\"{}\" y=\"{}\" style=\"font-family:sans-serif;font-size:12px;text-anchor:middle\">t</text>\n\
         <text x=\"16\" y=\"{}\" style=\"font-family:sans-serif;font-size:12px\">{}</text>",
        SIZE / 2.0,
        SIZE - PAD / 2.0 + 10.0,
        SIZE / 2.0,
        if log { "log10 E" } else { "E" }
    );
    for (k, (t, y)) in [(0.0, lo), (t_end, hi)].iter().enumerate() {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" style=\"font-family:sans-serif;font-size:10px;text-anchor:middle\">{t:.4}</text>\
             <text x=\"{:.2}\" y=\"{:.2}\" style=\"font-family:sans-serif;font-size:10px;text-anchor:end\">{y:.4}</text>",
            px(*t),
            SIZE - PAD + 14.0,
            PAD - 4.0,
            if k == 0 { SIZE - PAD } else { PAD + 10.0 },
        );
    }
    let line: Vec<String> = tr
        .times
        .iter()
        .zip(&ys)
        .map(|(&t, &y)| format!("{:.2},{:.2}", px(t), py(y)))
        .collect();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" style=\"fill:none;stroke:#1f77b4;stroke-width:1.5\"/>",
        line.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slog_is_odd_and_monotone() {
        assert_eq!(slog(0.0), 0.0);
        assert_eq!(slog(-9.0), -slog(9.0));
        assert!((slog(9.0) - 1.0).abs() < 1e-15);
        assert!(slog(2.0) < slog(3.0));
    }
}
