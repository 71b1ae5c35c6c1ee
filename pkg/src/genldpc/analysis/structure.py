"""Structural diagnostics: degree-1 placement, short cycles through degree-2 VNs."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ..codes import ParityCheckMatrix, girth_and_cycles, profile


@dataclass
class StructureReport:
    num_deg1_vns: int
    deg1_sharing_max: int
    cns_with_multiple_deg1: list[int]
    deg2_on_4cycles: list[int]
    deg2_on_short_cycles: list[int]
    short_cycle_bound: int
    girth: float
    four_cycles: int
    vn_degrees: dict[int, int] = field(default_factory=dict)
    cn_degrees: dict[int, int] = field(default_factory=dict)

    @property
    def deg1_rule_holds(self) -> bool:
        """No check node touches more than one degree-1 VN."""
        return self.deg1_sharing_max <= 1

    def as_dict(self) -> dict:
        return {
            "num_deg1_vns": self.num_deg1_vns,
            "deg1_sharing_max": self.deg1_sharing_max,
            "cns_with_multiple_deg1": self.cns_with_multiple_deg1,
            "deg2_on_4cycles": self.deg2_on_4cycles,
            "deg2_on_short_cycles": self.deg2_on_short_cycles,
            "short_cycle_bound": self.short_cycle_bound,
            "girth": None if np.isinf(self.girth) else int(self.girth),
            "four_cycles": self.four_cycles,
            "vn_degrees": self.vn_degrees,
            "cn_degrees": self.cn_degrees,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "value"])
        for key, value in self.as_dict().items():
            if isinstance(value, (list, dict)):
                value = " ".join(f"{a}:{b}" for a, b in value.items()) if isinstance(value, dict) \
                    else " ".join(map(str, value))
            w.writerow([key, value])
        return buf.getvalue()


def structure_report(H: ParityCheckMatrix, short_cycle_bound: int = 4) -> StructureReport:
    """Column indices in the lists are 0-based."""
    cw = H.col_weights
    deg1 = np.flatnonzero(cw == 1)
    per_cn = np.zeros(H.m, dtype=np.int64)
    d = H.dense
    for v in deg1:
        per_cn[np.flatnonzero(d[:, v])[0]] += 1
    cycles = girth_and_cycles(H)
    deg2 = np.flatnonzero(cw == 2)
    prof = profile(H)
    return StructureReport(
        num_deg1_vns=int(deg1.size),
        deg1_sharing_max=int(per_cn.max(initial=0)),
        cns_with_multiple_deg1=np.flatnonzero(per_cn >= 2).tolist(),
        deg2_on_4cycles=[int(v) for v in deg2 if cycles.vn_shortest[v] <= 4],
        deg2_on_short_cycles=[int(v) for v in deg2 if cycles.vn_shortest[v] <= short_cycle_bound],
        short_cycle_bound=short_cycle_bound,
        girth=cycles.girth,
        four_cycles=cycles.four_cycles,
        vn_degrees=prof.vn_degrees,
        cn_degrees=prof.cn_degrees,
    )
