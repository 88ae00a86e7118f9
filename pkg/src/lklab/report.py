"""Assemble the entropy report of a driving measure."""

from __future__ import annotations

import math

from .lk_solver import becker_check
from .measures import (
    CircleDensity,
    DrivingMeasure,
    EntropyReport,
    dirichlet_energy,
    invariant_entropy,
    pinsker_bound,
    slice_entropy,
    total_energy,
    total_entropy,
)


def build_entropy_report(mu: DrivingMeasure, becker: bool = True) -> EntropyReport:
    """Entropy, energy, Pinsker and Becker summaries of ``mu``.

    Per-slice rows give the entropy and energy of the slice as stored. The
    Pinsker value is the time integral of the Pinsker bound of the normalized
    slices, so it is a lower bound for the entropy of ``mu`` only when all
    slice masses are 1. Atomic slices have infinite entropy and energy and no
    Pinsker value.
    """
    rows = []
    pinsker_total = 0.0
    for s in mu.slices:
        row = {"t0": s.t0, "t1": s.t1, "mass": s.mass}
        if isinstance(s.content, CircleDensity):
            row["entropy"] = slice_entropy(s.content)
            row["energy"] = dirichlet_energy(s.content)
            pb = pinsker_bound(s.content.normalized())
            row["pinsker"] = pb
            pinsker_total += s.duration * pb
        else:
            row["entropy"] = math.inf
            row["energy"] = math.inf
        rows.append(row)
    if not mu.is_density_valued:
        pinsker_total = None
    energy = total_energy(mu)
    kappa = bound = None
    if becker:
        rep = becker_check(mu)
        kappa, bound = rep.kappa_estimate, rep.entropy_bound
    return EntropyReport(
        total_entropy=total_entropy(mu),
        invariant_entropy=invariant_entropy(mu),
        energy=energy,
        per_slice=rows,
        pinsker=pinsker_total,
        becker_kappa=kappa,
        becker_entropy_bound=bound,
        log_sobolev_bound=2.0 * energy,
    )
