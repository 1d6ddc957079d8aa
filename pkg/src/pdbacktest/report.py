"""Method registry and the per-class adjustment report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import classical
from .minp import MinPEngine, MinPInput, minp_single_step, minp_step_down

#: method key -> display label
METHOD_LABELS = {
    "bonf": "Bonf",
    "hol": "Hol",
    "hom": "Hom",
    "bh": "BH",
    "a-bh": "a-BH",
    "by": "BY",
    "d-ind": "d-Ind",
    "d-bonf": "d-Bonf",
    "sd-d-bonf": "sd-d-Bonf",
    "sd-d-ind": "sd-d-Ind",
}

#: the eight procedures of the standard battery
DEFAULT_METHODS = ("bonf", "hol", "hom", "bh", "a-bh", "d-bonf", "d-ind", "sd-d-bonf")

#: methods controlling the familywise error rate (the rest control FDR)
FWER_METHODS = ("bonf", "hol", "hom", "d-ind", "d-bonf", "sd-d-bonf", "sd-d-ind")

_CLASSICAL = {
    "bonf": classical.adjust_bonferroni,
    "hol": classical.adjust_holm,
    "hom": classical.adjust_hommel,
    "bh": classical.adjust_bh,
    "a-bh": classical.adjust_abh,
    "by": classical.adjust_by,
}

_MINP = {
    "d-ind": ("single", "independence"),
    "d-bonf": ("single", "bonferroni"),
    "sd-d-bonf": ("step", "bonferroni"),
    "sd-d-ind": ("step", "independence"),
}


def check_methods(methods) -> tuple:
    methods = tuple(m.strip().lower() for m in methods)
    if not methods:
        raise ValueError("method list is empty")
    unknown = [m for m in methods if m not in METHOD_LABELS]
    if unknown:
        raise ValueError(
            f"unknown method(s) {', '.join(unknown)}; valid methods: {', '.join(METHOD_LABELS)}"
        )
    return methods


def adjust(data: MinPInput, methods=DEFAULT_METHODS) -> dict:
    """Adjusted p-values of one validation sample for each method."""
    methods = check_methods(methods)
    pv = data.pvalues()
    out = {}
    for m in methods:
        if m in _CLASSICAL:
            out[m] = _CLASSICAL[m](pv)
        else:
            kind, mode = _MINP[m]
            fn = minp_single_step if kind == "single" else minp_step_down
            out[m] = fn(data, mode)
    return out


def adjust_many(engine: MinPEngine, defaults: np.ndarray, methods=DEFAULT_METHODS) -> dict:
    """Adjusted p-values for an ``(R, K)`` batch of default counts."""
    methods = check_methods(methods)
    pv = engine.pvalues(defaults)
    out = {}
    for m in methods:
        if m in _CLASSICAL:
            out[m] = _CLASSICAL[m](pv)
        else:
            kind, mode = _MINP[m]
            fn = engine.single_step if kind == "single" else engine.step_down
            out[m] = fn(defaults, mode)
    return out


@dataclass
class AdjustmentReport:
    """Raw and adjusted p-values per class with decisions at ``alpha``.

    Classes without borrowers are kept in ``class_ids``/``labels`` but carry
    ``None`` p-values and are not part of the tested family.
    """

    class_ids: list
    labels: list
    n: list
    pd: list
    defaults: list
    raw: list
    adjusted: dict
    alpha: float
    hl_pvalue: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def methods(self) -> list:
        return list(self.adjusted)

    def rejected(self, method: str) -> list:
        return [None if v is None else v <= self.alpha for v in self.adjusted[method]]

    def flagged(self, method: str) -> list:
        """Labels of classes rejected by ``method``."""
        return [lab for lab, r in zip(self.labels, self.rejected(method)) if r]

    def global_reject(self) -> dict:
        return {
            m: any(v is not None and v <= self.alpha for v in vals)
            for m, vals in self.adjusted.items()
        }

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "methods": self.methods,
            "hl_pvalue": self.hl_pvalue,
            "meta": self.meta,
            "classes": [
                {
                    "class": cid,
                    "label": lab,
                    "n": n,
                    "pd": pd,
                    "defaults": d,
                    "pvalue": raw,
                    "adjusted": {m: self.adjusted[m][i] for m in self.methods},
                    "reject": {m: self.rejected(m)[i] for m in self.methods},
                }
                for i, (cid, lab, n, pd, d, raw) in enumerate(
                    zip(self.class_ids, self.labels, self.n, self.pd, self.defaults, self.raw)
                )
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "AdjustmentReport":
        classes = obj["classes"]
        methods = obj["methods"]
        return cls(
            class_ids=[c["class"] for c in classes],
            labels=[c["label"] for c in classes],
            n=[c["n"] for c in classes],
            pd=[c["pd"] for c in classes],
            defaults=[c["defaults"] for c in classes],
            raw=[c["pvalue"] for c in classes],
            adjusted={m: [c["adjusted"][m] for c in classes] for m in methods},
            alpha=obj["alpha"],
            hl_pvalue=obj.get("hl_pvalue"),
            meta=obj.get("meta", {}),
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdjustmentReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def build_report(
    class_ids,
    labels,
    n,
    pd,
    defaults,
    alpha=0.05,
    methods=DEFAULT_METHODS,
    hl_pvalue=None,
    alternative="two-sided",
) -> AdjustmentReport:
    """Run the method battery on classes with at least one borrower."""
    methods = check_methods(methods)
    active = [i for i, nj in enumerate(n) if nj > 0]
    if not active:
        raise ValueError("no class has any borrowers")
    data = MinPInput(
        [n[i] for i in active],
        [pd[i] for i in active],
        [defaults[i] for i in active],
        alternative,
    )
    adj = adjust(data, methods)
    raw = data.pvalues()
    slot = {i: pos for pos, i in enumerate(active)}

    def spread(values):
        return [float(values[slot[i]]) if i in slot else None for i in range(len(n))]

    return AdjustmentReport(
        class_ids=list(class_ids),
        labels=list(labels),
        n=[int(v) for v in n],
        pd=[float(v) for v in pd],
        defaults=[int(v) for v in defaults],
        raw=spread(raw),
        adjusted={m: spread(v) for m, v in adj.items()},
        alpha=float(alpha),
        hl_pvalue=hl_pvalue,
        meta={"alternative": alternative, "family_size": len(active)},
    )
