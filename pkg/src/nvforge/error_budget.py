"""Six-term gate error probability for a hardware parameter set."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

TERMS = ("p_t1", "p_t2", "p_mw", "p_mag", "p_str", "p_dip")

# Published per-term values for REFERENCE_PARAMS; compared against the formula.
PUBLISHED = {
    "p_t1": 4e-4,
    "p_t2": 8e-6,
    "p_mw": 1.56e-4,
    "p_mag": 1.6e-3,
    "p_str": 4e-4,
    "p_dip": 1.95e-3,
    "total": 4.5e-3,
}


@dataclass(frozen=True)
class ErrorParams:
    t: float = 20.0  # us
    T1: float = 50.0  # ms
    T2: float = 1.0  # ms
    delta1: float = 10.0  # kHz
    omega_mw: float = 800.0  # kHz
    omega_opt: float = 10.0  # MHz
    delta_mag: float = 20.0  # MHz
    delta_str: float = 500.0  # MHz
    nu_dip: float = 100.0  # kHz

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and v >= 0) or (f.name != "t" and v == 0):
                raise ValueError(f"{f.name} must be positive, got {v!r}")


REFERENCE_PARAMS = ErrorParams()


@dataclass(frozen=True)
class ErrorBudget:
    p_t1: float
    p_t2: float
    p_mw: float
    p_mag: float
    p_str: float
    p_dip: float
    discrepancies: tuple = ()

    @property
    def total(self):
        return math.fsum(getattr(self, name) for name in TERMS)

    def as_dict(self):
        out = {name: getattr(self, name) for name in TERMS}
        out["total"] = self.total
        out["discrepancies"] = [dict(d) for d in self.discrepancies]
        return out


def _published_discrepancies(budget, rel_tol=5e-3):
    notes = []
    values = {**{n: getattr(budget, n) for n in TERMS}, "total": budget.total}
    for name, published in PUBLISHED.items():
        value = values[name]
        if not math.isclose(value, published, rel_tol=rel_tol):
            notes.append(
                {
                    "term": name,
                    "formula_value": value,
                    "published_value": published,
                    "ratio": value / published,
                }
            )
    return tuple(notes)


def error_probability(p):
    """Evaluate every error term; unit conversions: us/ms, kHz/kHz, kHz/MHz, MHz/MHz.

    When ``p`` is the reference parameter set the result carries a note for
    every term whose published value the formula does not reproduce.
    """
    budget = ErrorBudget(
        p_t1=p.t / (p.T1 * 1e3),
        p_t2=(p.t / (p.T2 * 1e3)) ** 3,
        p_mw=(p.delta1 / p.omega_mw) ** 2,
        p_mag=(p.omega_mw / (p.delta_mag * 1e3)) ** 2,
        p_str=(p.omega_opt / p.delta_str) ** 2,
        p_dip=(p.nu_dip / p.omega_mw) ** 2,
    )
    if p == REFERENCE_PARAMS:
        budget = ErrorBudget(**{n: getattr(budget, n) for n in TERMS}, discrepancies=_published_discrepancies(budget))
    return budget


def sweep_omega_mw(p, omegas_khz):
    """Budgets over a list of microwave Rabi frequencies, other parameters fixed."""
    return [(w, error_probability(ErrorParams(**{**asdict(p), "omega_mw": w}))) for w in omegas_khz]
