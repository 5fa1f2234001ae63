"""Worst-case clock-drift error table for all eight methods."""

from __future__ import annotations

from dataclasses import dataclass

from ..analysis import FormulaTerms, worst_case_bound
from ..geometry import PropagationConstants
from ..protocols import Method
from ..timebase import PpmDrift


@dataclass(frozen=True)
class Table1Row:
    method: Method
    name: str
    formula: str
    latex: str
    anchor_nodes: str
    tag_nodes: str
    worst_error_m: float


# (display name, unicode formula, LaTeX formula, anchor capability, tag capability)
ROWS: dict[Method, tuple[str, str, str, str, str]] = {
    Method.SIMPLE_TOA: (
        "Simple ToA",
        "t1 · (εB − εA)",
        r"t_1 \cdot (\epsilon_B - \epsilon_A)",
        "RX",
        "TX",
    ),
    Method.TWR: (
        "TWR",
        "½ (εA − εB) · DB",
        r"\frac{1}{2} (\epsilon_A - \epsilon_B) \cdot D_B",
        "TX + RX",
        "TX + RX",
    ),
    Method.SDS_TWR: (
        "SDS-TWR",
        "¼ (εA − εB) · (DB − DA)",
        r"\frac{1}{4} (\epsilon_A - \epsilon_B) \cdot (D_B - D_A)",
        "TX + RX",
        "TX + RX",
    ),
    Method.ASYM_DS_TWR: (
        "Asym-DS-TWR",
        "½ (εA + εB) · dAB",
        r"\frac{1}{2}(\epsilon_A + \epsilon_B) \cdot d_{AB}",
        "TX + RX",
        "TX + RX",
    ),
    Method.SIMPLE_TDOA: (
        "Simple TDOA",
        "(εB − εA) · t1",
        r"(\epsilon_B - \epsilon_A) \cdot t_1",
        "RX",
        "TX",
    ),
    Method.WHISTLE: (
        "Whistle",
        "(εB − εA) · DB",
        r"(\epsilon_B - \epsilon_A) \cdot D_B",
        "RX + one TX",
        "TX",
    ),
    Method.DJKM: (
        "DJKM",
        "(εT − εB) · DB",
        r"(\epsilon_T - \epsilon_B) \cdot D_B",
        "RX + TX",
        "RX",
    ),
    Method.DP_WHISTLE: (
        "DP-Whistle",
        "(εA + εB) · dAB",
        r"(\epsilon_A + \epsilon_B) \cdot d_{AB}",
        "RX + one TX",
        "TX",
    ),
}


def reproduce_table1(
    d_a: float = 1e-3,
    d_b: float = 1e-3,
    t1: float = 1.0,
    d_ab: float = 100e-9,
    eps_max: PpmDrift = PpmDrift.from_ppm(20),
    c: float = 3e8,
) -> list[Table1Row]:
    """One row per method: formula and worst-case error in meters at the given terms."""
    k = PropagationConstants(c)
    terms = FormulaTerms(t1=t1, d_a=d_a, d_b=d_b, d_ab=d_ab, tdoa=0.0)
    rows = []
    for method, (name, formula, latex, anchors, tags) in ROWS.items():
        bound = worst_case_bound(method, terms, eps_max, k)
        rows.append(Table1Row(method, name, formula, latex, anchors, tags, bound.worst_error_m))
    return rows


def format_table(rows: list[Table1Row], latex: bool = False) -> str:
    header = ("Method", "Clock-drift error", "Worst case [m]", "Anchor", "Tag")
    body = [
        (r.name, r.latex if latex else r.formula, f"{r.worst_error_m:.6g}", r.anchor_nodes, r.tag_nodes)
        for r in rows
    ]
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(str(x).ljust(w) for x, w in zip(line, widths)).rstrip() for line in [header, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
