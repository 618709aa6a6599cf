"""Result files: draws.csv, summary.json, timings.csv, bands_<var>.svg, manifest.json."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from xml.sax.saxutils import escape

from .. import __version__
from .config import SCHEMA_VERSION
from .pipeline import SHARED, DrawRecord, ResponseRecord, RunOutput

DRAW_COLUMNS = ("design", "draw", "stream", "status", "radius", "variable", "horizon",
                "lower", "upper", "method", "sample_mean")
TIMING_COLUMNS = ("design", "algorithm", "calls", "seconds")


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def _parse_num(s: str):
    return None if s == "" else float(s)


def write_draws_csv(records: list[DrawRecord], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DRAW_COLUMNS)
        for r in records:
            head = [r.design, r.draw, r.stream, r.status, _num(r.radius)]
            if not r.responses:
                w.writerow(head + [""] * 6)
            for x in r.responses:
                w.writerow(head + [x.variable, x.horizon, _num(x.lower), _num(x.upper), x.method or "",
                                   _num(x.sample_mean)])


def read_draws_csv(path: Path) -> list[DrawRecord]:
    """Inverse of :func:`write_draws_csv`."""
    out: list[DrawRecord] = []
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        key = (row["design"], int(row["draw"]))
        resp = ()
        if row["variable"]:
            resp = (ResponseRecord(row["variable"], int(row["horizon"]), _parse_num(row["lower"]),
                                   _parse_num(row["upper"]), row["method"] or None,
                                   _parse_num(row["sample_mean"])),)
        if out and (out[-1].design, out[-1].draw) == key:
            prev = out[-1]
            out[-1] = DrawRecord(prev.design, prev.draw, prev.stream, prev.status, prev.radius,
                                 prev.responses + resp)
        else:
            out.append(DrawRecord(key[0], key[1], row["stream"], row["status"], float(row["radius"]), resp))
    return out


def _pair(p):
    return None if p is None else [float(p[0]), float(p[1])]


def summary_dict(out: RunOutput) -> dict:
    cfg = out.config
    designs = []
    for s in out.summaries:
        resp = {}
        for var, rows in s.responses.items():
            resp[var] = [
                {
                    "horizon": h,
                    "set_of_posterior_means": None if rs is None else _pair(rs.posterior_means),
                    "robust_credible_region": None if rs is None else _pair(rs.credible_region),
                    "lower_probability": None if rs is None else rs.lower_probability,
                }
                for h, rs in rows
            ]
        designs.append({
            "name": s.name,
            "n_draws": s.n_draws,
            "n_nonempty": s.n_nonempty,
            "prob_empty": s.prob_empty,
            "responses": resp,
        })
    return {
        "schema": SCHEMA_VERSION,
        "mode": out.mode,
        "seed": cfg.seed,
        "alpha": cfg.alpha,
        "event": cfg.event,
        "posterior_draws": cfg.posterior_draws,
        "designs": designs,
    }


def write_timings_csv(out: RunOutput, path: Path, record_seconds: bool) -> None:
    keys = sorted(out.timings.calls, key=lambda k: (k[0] != SHARED, k[0], k[1]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        for k in keys:
            secs = f"{out.timings.seconds[k]:.6f}" if record_seconds else ""
            w.writerow([k[0], k[1], out.timings.calls[k], secs])


# --- SVG band plots

_PW, _PH = 360, 260
_ML, _MR, _MT, _MB = 52, 14, 30, 36


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _panel(x0: float, title: str, rows, y_lo: float, y_hi: float, h_lo: int, h_hi: int) -> list[str]:
    parts = [f'<g transform="translate({_fmt(x0)},0)">',
             f'<text x="{_PW / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>']
    iw, ih = _PW - _ML - _MR, _PH - _MT - _MB

    def sx(h):
        return _ML + (0.5 if h_hi == h_lo else (h - h_lo) / (h_hi - h_lo)) * iw

    def sy(v):
        return _MT + (1.0 - (v - y_lo) / (y_hi - y_lo)) * ih

    parts.append(f'<rect x="{_ML}" y="{_MT}" width="{iw}" height="{ih}" fill="none" stroke="#444"/>')
    pts = [(h, rs) for h, rs in rows if rs is not None]
    if not pts:
        parts.append(f'<text x="{_ML + iw / 2:.1f}" y="{_MT + ih / 2:.1f}" text-anchor="middle" '
                     'font-size="11">identified set empty in every draw</text>')
    else:
        if y_lo < 0 < y_hi:
            parts.append(f'<line x1="{_ML}" x2="{_ML + iw}" y1="{_fmt(sy(0.0))}" y2="{_fmt(sy(0.0))}" '
                         'stroke="#888" stroke-dasharray="4,3"/>')

        def band(lo_of, hi_of, fill, opacity):
            top = " ".join(f"{_fmt(sx(h))},{_fmt(sy(hi_of(rs)))}" for h, rs in pts)
            bot = " ".join(f"{_fmt(sx(h))},{_fmt(sy(lo_of(rs)))}" for h, rs in reversed(pts))
            return f'<polygon points="{top} {bot}" fill="{fill}" fill-opacity="{opacity}" stroke="none"/>'

        parts.append(band(lambda r: r.credible_region[0], lambda r: r.credible_region[1], "#9ecae1", "0.6"))
        parts.append(band(lambda r: r.posterior_means[0], lambda r: r.posterior_means[1], "#08519c", "0.7"))
        for idx in (0, 1):
            line = " ".join(f"{_fmt(sx(h))},{_fmt(sy(rs.credible_region[idx]))}" for h, rs in pts)
            parts.append(f'<polyline points="{line}" fill="none" stroke="#3182bd" stroke-width="1"/>')
    for v in (y_lo, y_hi):
        parts.append(f'<text x="{_ML - 4}" y="{_fmt(sy(v) + 4)}" text-anchor="end" font-size="10">{_fmt(v)}</text>')
    for h in sorted({h_lo, h_hi}):
        parts.append(f'<text x="{_fmt(sx(h))}" y="{_MT + ih + 14}" text-anchor="middle" font-size="10">{h}</text>')
    parts.append(f'<text x="{_ML + iw / 2:.1f}" y="{_PH - 6}" text-anchor="middle" font-size="10">horizon</text>')
    parts.append("</g>")
    return parts


def band_svg(out: RunOutput, var: str) -> str:
    """One panel per design: posterior-means band (dark) inside the robust credible region (light)."""
    panels = [(s.name, s.responses.get(var, [])) for s in out.summaries]
    vals = [0.0]
    hs = []
    for _, rows in panels:
        for h, rs in rows:
            hs.append(h)
            if rs is not None:
                vals += list(rs.credible_region) + list(rs.posterior_means)
    y_lo, y_hi = min(vals), max(vals)
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    h_lo, h_hi = (min(hs), max(hs)) if hs else (0, 1)
    width = _PW * max(len(panels), 1)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{_PH}" '
             f'viewBox="0 0 {width} {_PH}" font-family="sans-serif">',
             f'<title>{escape(var)}: bounds by horizon</title>',
             f'<rect width="{width}" height="{_PH}" fill="white"/>']
    for k, (name, rows) in enumerate(panels):
        parts += _panel(k * _PW, f"{var} | {name}", rows, y_lo, y_hi, h_lo, h_hi)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in name)


def emit_outputs(out: RunOutput, directory: Path, record_seconds: bool | None = None) -> list[Path]:
    """Write every result file; returns the paths written (manifest last)."""
    cfg = out.config
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if record_seconds is None:
        record_seconds = cfg.record_timings
    written = []
    p = directory / "draws.csv"
    write_draws_csv(out.records, p)
    written.append(p)
    p = directory / "summary.json"
    p.write_text(json.dumps(summary_dict(out), indent=2, sort_keys=False) + "\n")
    written.append(p)
    p = directory / "timings.csv"
    write_timings_csv(out, p, record_seconds)
    written.append(p)
    if out.bench:
        p = directory / "bench.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("design", "draw", "algorithm", "result", "reference"))
            w.writerows(out.bench)
        written.append(p)
    if cfg.bounds_enabled and out.mode != "check":
        for var in cfg.bounds_variables:
            p = directory / f"bands_{_safe(var)}.svg"
            p.write_text(band_svg(out, var))
            written.append(p)
    manifest = {
        "schema": SCHEMA_VERSION,
        "package_version": __version__,
        "mode": out.mode,
        "seed": cfg.seed,
        "config_sha256": cfg.digest(),
        "data_sha256": _sha256(cfg.data_path),
        "posterior_draws": cfg.posterior_draws,
        "designs": [d.name for d in cfg.designs],
        "streams": {"posterior": "seed:draw", "gibbs": "seed:draw:design_index+1"},
        "files": {q.name: _sha256(q) for q in written},
    }
    p = directory / "manifest.json"
    p.write_text(json.dumps(manifest, indent=2) + "\n")
    written.append(p)
    return written
