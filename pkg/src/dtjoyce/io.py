"""JSON structure files and CSV plot data.

Complex numbers travel as two-element arrays [re, im]; rationals as "p/q" strings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .bps import (
    BpsStructure,
    ExplicitOmega,
    a1_structure,
    a2_structure,
    active_rays,
    conifold_structure,
    explicit_structure,
)


def parse_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex number must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    raise ValueError(f"cannot read a complex number from {v!r}")


def parse_rational(v) -> Fraction:
    if isinstance(v, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    raise ValueError(f"rationals are written as 'p/q' strings, got {v!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy arrays, complex numbers and fractions to the wire format."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)


# --- BPS structures ---------------------------------------------------------------------


def structure_from_dict(d: dict) -> BpsStructure:
    omega = d.get("omega")
    if isinstance(omega, dict) and "generator" in omega:
        gen = omega["generator"].lower()
        params = omega.get("params", {})
        cc = [parse_complex(c) for c in d.get("central_charge", [])]
        if gen == "a1":
            z = parse_complex(params["z"]) if "z" in params else cc[0]
            return a1_structure(z)
        if gen == "conifold":
            v = parse_complex(params["v"]) if "v" in params else cc[0]
            w = parse_complex(params["w"]) if "w" in params else cc[1]
            return conifold_structure(v, w)
        if gen == "a2":
            if "a" in params and "b" in params:
                from .a2 import A2Point, periods

                z1, z2 = periods(A2Point(parse_complex(params["a"]), parse_complex(params["b"])))
            else:
                z1 = parse_complex(params["z1"]) if "z1" in params else cc[0]
                z2 = parse_complex(params["z2"]) if "z2" in params else cc[1]
            return a2_structure(z1, z2, params.get("chamber"))
        raise ValueError(f"unknown generator {gen!r}")
    if not isinstance(omega, list):
        raise ValueError("omega must be a list of {class, value} entries or a generator")
    rank = int(d["rank"])
    skew = np.asarray(d.get("skew", np.zeros((rank, rank))), dtype=np.int64)
    cc = [parse_complex(c) for c in d["central_charge"]]
    if len(cc) != rank:
        raise ValueError(f"central_charge has {len(cc)} entries, rank is {rank}")
    pairs = [(e["class"], parse_rational(e["value"])) for e in omega]
    return explicit_structure(skew, cc, pairs, symmetrize=bool(d.get("symmetrize", False)))


def structure_to_dict(s: BpsStructure) -> dict:
    out = {
        "rank": s.rank,
        "skew": s.lattice.skew.tolist(),
        "central_charge": [[float(z.real), float(z.imag)] for z in s.central_charge],
    }
    if isinstance(s.omega, ExplicitOmega):
        out["omega"] = [{"class": list(g), "value": format_rational(v)} for g, v in sorted(s.omega.entries.items())]
    else:
        out["omega"] = {"generator": s.omega.kind, "params": {}}
        if s.omega.kind == "a2" and getattr(s.omega, "chamber", None):
            out["omega"]["params"]["chamber"] = s.omega.chamber
    return out


DATA_DIR = Path(__file__).parent / "data"


def load_structure(path: str | Path) -> BpsStructure:
    """Read a structure file; bare names of the bundled samples (a1.json, conifold.json, a2.json) also work."""
    path = Path(path)
    if not path.exists() and path.parent == Path(".") and (DATA_DIR / path.name).exists():
        path = DATA_DIR / path.name
    with open(path) as fh:
        return structure_from_dict(json.load(fh))


def save_structure(s: BpsStructure, path: str | Path) -> None:
    Path(path).write_text(json.dumps(structure_to_dict(s), indent=2) + "\n")


# --- plot data ---------------------------------------------------------------------------


def emit_plot_data(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV text: header row, then rows with complex entries split into re/im columns."""
    rows = list(rows)
    if not rows:
        raise ValueError("plot data needs at least one row")
    cols = []
    first = rows[0]
    for name, v in zip(header, first):
        if isinstance(v, (complex, np.complexfloating)):
            cols += [f"{name}_re", f"{name}_im"]
        else:
            cols.append(name)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(cols)
    for r in rows:
        out = []
        for v in r:
            if isinstance(v, (complex, np.complexfloating)):
                out += [repr(float(v.real)), repr(float(v.imag))]
            elif isinstance(v, (float, np.floating)):
                out.append(repr(float(v)))
            elif isinstance(v, (tuple, list)):
                out.append(" ".join(str(int(x)) for x in v))
            else:
                out.append(str(v))
        wr.writerow(out)
    return buf.getvalue()


def ray_diagram_rows(s: BpsStructure, cutoff: float) -> list[tuple]:
    """(angle, class, |Z|, Omega) for each active class below the cutoff, ordered by angle."""
    rows = []
    for ray, members in active_rays(s, cutoff):
        for g, v in members:
            rows.append((ray.angle, tuple(g), abs(s.Z(g)), format_rational(v)))
    return rows


def ray_diagram_csv(s: BpsStructure, cutoff: float) -> str:
    return emit_plot_data(["angle", "class", "abs_Z", "omega"], ray_diagram_rows(s, cutoff))


def asymptotics_csv(report: dict, hbars: Sequence[complex]) -> str:
    return emit_plot_data(["abs_hbar", "error"], [(abs(h), d) for h, d in zip(hbars, report["distances"])])
