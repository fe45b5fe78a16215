"""CSV regeneration of every analytic figure from library calls."""

from __future__ import annotations

import csv
import io
from collections.abc import Callable, Sequence

import numpy as np

from .core import AntennaConfig, make_independent
from .gains import (
    dep_gain_terms,
    delta_dof_dep,
    delta_dof_ind,
    gain_sweep,
    ind_gain_terms,
    peak_gain,
)
from .region import sum_dof, sum_dof_no_relay

P_SWEEP = [i / 100 for i in range(101)]
RELAY_ANTENNAS = range(0, 6)
LOW_TRAFFIC_P = 0.25


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def render_csv(comment: str, columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def fig2() -> str:
    config = AntennaConfig(2, 1, 1, 1)
    rows = []
    for p in P_SWEEP:
        law = make_independent(p, config.K)
        rows.append((p, sum_dof(config, law), sum_dof_no_relay(config, law)))
    return render_csv(
        f"fig2 sum DoF with and without a relay {config} independent traffic",
        ["p", "sumdof_with_relay", "sumdof_without_relay"],
        rows,
    )


def fig5() -> str:
    rows = []
    for K in range(2, 65):
        config = AntennaConfig(K, 1, 1, K - 1)
        dep = peak_gain(config, "dependent")
        ind = peak_gain(config, "independent")
        rows.append((K, dep.p_star, dep.value, ind.value, dep.value - ind.value))
    return render_csv(
        "fig5 peak relaying gains M=N=1 L=K-1 p=1/K K=2..64",
        ["K", "p_star", "peak_dep", "peak_ind", "gap"],
        rows,
    )


def _gain_vs_relay(name: str, mode: str) -> str:
    gain = delta_dof_dep if mode == "dependent" else delta_dof_ind
    rows = []
    for L in RELAY_ANTENNAS:
        config = AntennaConfig(4, 1, 1, L)
        values = gain(config, np.array(P_SWEEP))
        rows.extend((L, p, v) for p, v in zip(P_SWEEP, values))
    column = "gain_dep" if mode == "dependent" else "gain_ind"
    return render_csv(
        f"{name} {mode} relaying gain vs L K=4 M=N=1 L=0..5 p=0..1 step 0.01",
        ["L", "p", column],
        rows,
    )


def fig6() -> str:
    return _gain_vs_relay("fig6", "dependent")


def fig7() -> str:
    return _gain_vs_relay("fig7", "independent")


def fig8() -> str:
    rows = []
    for L in RELAY_ANTENNAS:
        config = AntennaConfig(4, 1, 1, L)
        rows.append((L, delta_dof_dep(config, LOW_TRAFFIC_P), delta_dof_ind(config, LOW_TRAFFIC_P)))
    return render_csv(
        "fig8 relaying gain vs L K=4 M=N=1 p=0.25",
        ["L", "gain_dep", "gain_ind"],
        rows,
    )


def _sweep(name: str, config: AntennaConfig) -> str:
    rows = gain_sweep(config, P_SWEEP)
    columns = ["p", "gain_dep", "gain_ind", "sum_dof_with_relay", "sum_dof_without_relay"]
    return render_csv(
        f"{name} relaying gains vs p {config} sum DoF under independent traffic",
        columns,
        [[r[c] for c in columns] for r in rows],
    )


def fig9() -> str:
    return _sweep("fig9", AntennaConfig(2, 1, 1, 1))


def fig12a() -> str:
    return _sweep("fig12a", AntennaConfig(4, 2, 7, 1))


def fig12b() -> str:
    return _sweep("fig12b", AntennaConfig(4, 2, 1, 1))


def fig13() -> str:
    config = AntennaConfig(4, 1, 1, 3)
    p = np.array(P_SWEEP)
    recv_dep, trans_dep = dep_gain_terms(config, p)
    recv_ind, trans_ind = ind_gain_terms(config, p)
    rows = zip(p, recv_dep, recv_ind, trans_dep, trans_ind,
               np.minimum(recv_dep, trans_dep), np.minimum(recv_ind, trans_ind))
    return render_csv(
        f"fig13 receive- and transmit-cut gain terms {config}",
        ["p", "recv_dep", "recv_ind", "trans_dep", "trans_ind", "gain_dep", "gain_ind"],
        list(rows),
    )


FIGURES: dict[str, Callable[[], str]] = {
    "fig2": fig2,
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
    "fig9": fig9,
    "fig12a": fig12a,
    "fig12b": fig12b,
    "fig13": fig13,
}


def figure(name: str) -> str:
    try:
        return FIGURES[name]()
    except KeyError:
        raise KeyError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}") from None


def parse_csv(text: str) -> list[dict[str, str]]:
    """Read a figure CSV back, skipping the comment line."""
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))
