"""Lusternik-Schnirelmann-type upper bounds from critical data.

The aggregation rule: group critical components by value up to a cutoff,
take the largest assigned subspace complexity per value, and sum.  Component
complexities are inputs, not computed; a value of 1 is only justified when a
planner constructively produced a section on the component (or the user
asserts it).  All values use the unreduced convention throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional

from .errors import UnknownComplexity, UnknownSpace


@dataclass(frozen=True)
class ComponentComplexity:
    value: float
    complexity: Optional[int]
    label: str = ""

    def __post_init__(self):
        if self.complexity is not None and self.complexity < 1:
            raise ValueError("assigned complexities are >= 1")


@dataclass(frozen=True)
class BoundInput:
    """Critical components with per-component subspace complexities.

    mode is one of 'plain' (explicit component list), 'product-sum' /
    'fiber-signs' (components obtained by summing one value per slot).
    """

    mode: str
    components: tuple

    @classmethod
    def plain(cls, entries) -> "BoundInput":
        comps = tuple(
            e if isinstance(e, ComponentComplexity) else ComponentComplexity(*e)
            for e in entries
        )
        return cls("plain", comps)

    @classmethod
    def product_sum(cls, slot_values, complexity: int = 1,
                    mode: str = "product-sum") -> "BoundInput":
        """Expand per-slot value lists into sum components, all with the same
        complexity assignment."""
        comps = []
        for combo in product(*slot_values):
            comps.append(
                ComponentComplexity(
                    value=float(sum(combo)),
                    complexity=complexity,
                    label="(" + ",".join(f"{v:g}" for v in combo) + ")",
                )
            )
        return cls(mode, tuple(comps))

    @classmethod
    def fiber_signs(cls, r: int, complexity: int = 1) -> "BoundInput":
        """Sign tuples (+-1)^r combined by summation."""
        return cls.product_sum([(-1.0, 1.0)] * r, complexity, mode="fiber-signs")

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "mode": self.mode,
            "components": [
                {"value": c.value, "complexity": c.complexity, "label": c.label}
                for c in self.components
            ],
        }


@dataclass(frozen=True)
class BoundResult:
    bound: int
    breakdown: tuple  # (value, contribution) pairs
    exact: Optional[bool] = None
    note: str = ""

    def to_json(self) -> dict:
        out = {
            "schema": "v1",
            "bound": int(self.bound),
            "breakdown": [[float(v), int(c)] for v, c in self.breakdown],
        }
        if self.exact is not None:
            out["exact"] = bool(self.exact)
        if self.note:
            out["note"] = self.note
        return out

    def table(self) -> str:
        lines = [f"{'value':>12}  {'contribution':>12}"]
        for v, c in self.breakdown:
            lines.append(f"{v:>12g}  {c:>12d}")
        lines.append(f"{'bound':>12}  {self.bound:>12d}")
        return "\n".join(lines)


def ls_upper_bound(inp: BoundInput, lambda_cut: float = math.inf,
                   value_tol: float = 1e-6) -> BoundResult:
    """Sum over values <= lambda_cut of the per-value maximum complexity.

    Values within value_tol of each other count as one critical level.
    Raises UnknownComplexity listing the components whose complexity is
    needed but unassigned.
    """
    comps = [c for c in inp.components if c.value <= lambda_cut + value_tol]
    if not comps:
        return BoundResult(bound=0, breakdown=())
    missing = [(c.value, c.label) for c in comps if c.complexity is None]
    if missing:
        raise UnknownComplexity(
            f"{len(missing)} component(s) below the cutoff have no assigned complexity",
            components=missing,
        )
    comps.sort(key=lambda c: c.value)
    breakdown = []
    level_value = comps[0].value
    level_max = comps[0].complexity
    for c in comps[1:]:
        if c.value - level_value > value_tol:
            breakdown.append((level_value, level_max))
            level_value, level_max = c.value, c.complexity
        else:
            level_max = max(level_max, c.complexity)
    breakdown.append((level_value, level_max))
    return BoundResult(bound=sum(c for _, c in breakdown), breakdown=tuple(breakdown))


def reference_tc(space: str, r: int, k: int = 1) -> int:
    """Reference sequential complexities, unreduced convention.

    'sphere-odd' -> r, 'sphere-even' -> r + 1,
    'product-odd-spheres' (k factors) -> k (r - 1) + 1.
    """
    if r < 2:
        raise UnknownSpace("reference values need r >= 2")
    if space == "sphere-odd":
        return r
    if space == "sphere-even":
        return r + 1
    if space == "product-odd-spheres":
        if k < 1:
            raise UnknownSpace("product needs k >= 1 factors")
        return k * (r - 1) + 1
    raise UnknownSpace(f"no reference value for space {space!r}")


def product_spheres_bound(k: int, r: int) -> BoundResult:
    """Upper bound for k odd-sphere factors and r waypoints: k (r - 1) + 1.

    Critical values are 0, 4, ..., 4 k (r - 1), one planner-constructed
    section per component, so every level contributes 1.  The reference
    value for products of odd spheres matches, so the bound is exact.
    """
    if k < 1 or r < 2:
        raise UnknownSpace("need k >= 1 and r >= 2")
    entries = [
        ComponentComplexity(value=4.0 * i, complexity=1)
        for i in range(k * (r - 1) + 1)
    ]
    result = ls_upper_bound(BoundInput.plain(entries))
    exact = result.bound == reference_tc("product-odd-spheres", r, k)
    return BoundResult(result.bound, result.breakdown, exact=exact,
                       note=f"k={k}, r={r}")


def unit_tangent_bound(m: int, r: int) -> BoundResult:
    """Upper bound r + 1 for the frame bundle over S^(4m-1), declared exact.

    Sign tuples in (+-1)^r grouped by their sum give r + 1 levels, each
    carried by a rotational planner section (contribution 1).  The fiber
    S^(4m-2) forces the lower bound r + 1, hence equality.
    """
    if m < 1 or r < 2:
        raise UnknownSpace("need m >= 1 and r >= 2")
    inp = BoundInput.fiber_signs(r, complexity=1)
    result = ls_upper_bound(inp)
    lower = reference_tc("sphere-even", r)
    exact = result.bound == lower
    return BoundResult(result.bound, result.breakdown, exact=exact,
                       note=f"m={m}, r={r}, fiber lower bound {lower}")


def bound_input_from_components(components, complexity: int = 1) -> BoundInput:
    """Plain input from detected critical components, one entry per component."""
    return BoundInput.plain(
        ComponentComplexity(value=float(c.value), complexity=complexity,
                            label=getattr(c, "label", ""))
        for c in components
    )
