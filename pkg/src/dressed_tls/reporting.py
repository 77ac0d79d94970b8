"""Output serialization: CSV tables, a text summary, and static SVG plots.

CSV numbers use Python's shortest round-trip float representation, so
re-parsing a file reproduces the binary values exactly and identical runs
produce byte-identical files.  SVG plots are generated directly (no plotting
library), are fully self-contained, and are presentation-only.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .scenarios import ResultBundle


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# -- trajectory tables --------------------------------------------------------

#: fixed column order of the joined trajectory table
TRAJECTORY_COLUMNS = (
    "t",
    "a1_re", "a1_im", "a2_re", "a2_im",
    "oracle_a1_re", "oracle_a1_im", "oracle_a2_re", "oracle_a2_im",
    "pop1", "pop2", "oracle_pop1", "oracle_pop2",
    "cos_half_abs", "sin_half_abs",
    "omega_ground_re", "omega_ground_im",
    "omega_excited_re", "omega_excited_im",
    "p_ground", "p_excited",
    "adiabatic_ratio",
    "normal_form_residual",
)


def trajectory_table(bundle: ResultBundle) -> tuple[tuple[str, ...], list[list]]:
    """Joined per-time-point table; absent outputs are filled with nan."""
    n = bundle.grid.size
    nanv = np.full(n, np.nan)

    def series(x):
        return nanv if x is None else np.asarray(x)

    sol = bundle.solution
    ora = bundle.oracle_traj
    if sol is not None:
        a1, a2 = sol.a1, sol.a2
        cos_abs = np.abs([s.cos_half for s in sol.snapshots])
        sin_abs = np.abs([s.sin_half for s in sol.snapshots])
        w_g = np.array([s.omega_ground for s in sol.snapshots])
        w_e = np.array([s.omega_excited_inst for s in sol.snapshots])
    else:
        a1 = a2 = nanv * (1 + 0j)
        cos_abs = sin_abs = nanv
        w_g = w_e = nanv * (1 + 0j)
    o1 = ora.a1 if ora is not None else a1 * np.nan
    o2 = ora.a2 if ora is not None else a1 * np.nan

    if bundle.adiabaticity is not None and bundle.adiabaticity.grid.size == n:
        ratio = bundle.adiabaticity.pointwise_margin
    elif bundle.adiabaticity is not None:
        # adiabaticity was evaluated on its own window; interpolate for the table
        pm = bundle.adiabaticity.pointwise_margin
        ratio = np.interp(bundle.grid, bundle.adiabaticity.grid, pm,
                          left=np.nan, right=np.nan)
    else:
        ratio = nanv

    cols = [
        bundle.grid,
        a1.real, a1.imag, a2.real, a2.imag,
        o1.real, o1.imag, o2.real, o2.imag,
        np.abs(a1) ** 2, np.abs(a2) ** 2, np.abs(o1) ** 2, np.abs(o2) ** 2,
        cos_abs, sin_abs,
        w_g.real, w_g.imag, w_e.real, w_e.imag,
        series(bundle.p_ground), series(bundle.p_excited),
        ratio,
        series(bundle.residual),
    ]
    rows = [[col[i] for col in cols] for i in range(n)]
    return TRAJECTORY_COLUMNS, rows


def source_tagged_rows(bundle: ResultBundle) -> tuple[tuple[str, ...], list[list]]:
    """Trajectory rows in the shared source-tagged schema.

    Closed-form and integrated trajectories share one schema; the ``source``
    column distinguishes them.
    """
    header = ("source", "t", "a1_re", "a1_im", "a2_re", "a2_im", "pop1", "pop2")
    rows: list[list] = []
    for tag, a1, a2 in (
        ("analytic", bundle.solution.a1, bundle.solution.a2),
        ("oracle", bundle.oracle_traj.a1, bundle.oracle_traj.a2),
    ):
        for i, t in enumerate(bundle.grid):
            rows.append([tag, t, a1[i].real, a1[i].imag, a2[i].real, a2[i].imag,
                         abs(a1[i]) ** 2, abs(a2[i]) ** 2])
    return header, rows


def adiabaticity_table(report) -> tuple[list[str], list[list]]:
    pairs = report.pairs()
    header = ["t"] + [f"ratio_{n}_{k}" for n, k in pairs] + ["standard", "born_fock"]
    rows = []
    for i, t in enumerate(report.grid):
        row = [t] + [report.ratios[p][i] for p in pairs]
        row += [report.standard[i], report.born_fock[i]]
        rows.append(row)
    return header, rows


def summary_text(bundle: ResultBundle) -> str:
    s = bundle.scenario
    lines = [
        f"scenario: {s.name}",
        f"description: {s.description}",
        f"grid: [{s.grid_start:g}, {s.grid_stop:g}] x {s.grid_points}",
        f"pulse: {s.pulse.envelope} peak={s.pulse.omega_peak:g} "
        f"width={s.pulse.width if s.pulse.width is not None else '-'} "
        f"phase={s.pulse.phase} detuning={s.pulse.detuning:g}",
        f"system: omega1={s.system.omega1:g} omega2={s.system.omega2:g} "
        f"gamma={s.system.gamma_real:g}-{s.system.gamma_imag:g}i carrier={s.carrier:g}",
    ]
    if bundle.oracle_traj is not None:
        st = bundle.oracle_traj.stats
        lines.append(
            f"oracle: {st.method} rel_tol={st.rel_tol:g} abs_tol={st.abs_tol:g} "
            f"steps={st.accepted} rejected={st.rejected} rhs_evals={st.rhs_evals}"
        )
        lines.append(f"final norm: {bundle.oracle_traj.norm[-1]!r}")
    if bundle.adiabaticity is not None:
        lines.append(f"adiabaticity margin: {bundle.adiabaticity.margin!r}")
    if bundle.comparison is not None:
        c = bundle.comparison
        lines.append(
            f"comparison: max_pop_error={c.max_pop_error!r} "
            f"max|da1|={c.max_err_a1!r} max|da2|={c.max_err_a2!r} "
            f"final_phase_error={c.final_phase_error_a1!r}"
        )
    if bundle.residual is not None:
        lines.append(f"normal-form residual max: {float(np.max(bundle.residual))!r}")
    if bundle.wkb_ratio is not None:
        lines.append(f"wkb remainder ratio max: {float(np.max(bundle.wkb_ratio))!r}")
    if bundle.p_excited is not None:
        lines.append(f"max dressed excited population: {float(np.max(bundle.p_excited))!r}")
    if bundle.virtual_ground_population is not None:
        lines.append(
            f"max virtual ground population: "
            f"{float(np.max(bundle.virtual_ground_population))!r}"
        )
    for key, val in sorted(bundle.metadata.items()):
        lines.append(f"metadata {key}: {val}")
    return "\n".join(lines) + "\n"


# -- minimal self-contained SVG line plots ------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 800, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * step:
        out.append(round(v, 12))
        v += step
    return out


def write_svg_plot(path, x: np.ndarray, series: dict[str, np.ndarray],
                   title: str = "", xlabel: str = "t") -> None:
    """Plot time series as a standalone SVG file (no renderer invoked)."""
    x = np.asarray(x, dtype=float)
    finite_vals = np.concatenate([
        v[np.isfinite(v)] for v in (np.asarray(s, dtype=float) for s in series.values())
    ] or [np.array([0.0])])
    ylo = float(np.min(finite_vals)) if finite_vals.size else 0.0
    yhi = float(np.max(finite_vals)) if finite_vals.size else 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo -= pad
    yhi += pad
    xlo, xhi = float(x[0]), float(x[-1])

    def px(v):
        return _ML + (v - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def py(v):
        return _H - _MB - (v - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    axis = 'stroke="#333" stroke-width="1"'
    parts.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" {axis}/>')
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" {axis}/>')
    for tx in _ticks(xlo, xhi):
        parts.append(
            f'<line x1="{px(tx):.2f}" y1="{_H - _MB}" x2="{px(tx):.2f}" '
            f'y2="{_H - _MB + 5}" {axis}/>'
            f'<text x="{px(tx):.2f}" y="{_H - _MB + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tx:g}</text>'
        )
    for ty in _ticks(ylo, yhi):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py(ty):.2f}" x2="{_ML}" y2="{py(ty):.2f}" {axis}/>'
            f'<text x="{_ML - 8}" y="{py(ty) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{ty:g}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    for idx, (name, vals) in enumerate(series.items()):
        vals = np.asarray(vals, dtype=float)
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(
            f"{px(xx):.2f},{py(vv):.2f}" for xx, vv in zip(x, vals) if math.isfinite(vv)
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        ly = _MT + 14 + 14 * idx
        parts.append(
            f'<line x1="{_W - _MR - 130}" y1="{ly - 4}" x2="{_W - _MR - 105}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
            f'<text x="{_W - _MR - 100}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
