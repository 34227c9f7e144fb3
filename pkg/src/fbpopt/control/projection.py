"""
Admissible Controls

``U_ad`` is the closed ``L^2(I)`` ball of a given radius.  Inner products
and norms of nodal control profiles use the P1 mass matrix.
"""

from __future__ import annotations

import numpy as np

from ..fem.assembly import assemble_mass_1d
from ..fem.fields import ControlProfile


def l2_inner(a: ControlProfile, b: ControlProfile) -> float:
    """Mass-matrix inner product of two profiles on the same mesh."""
    if a.mesh != b.mesh:
        raise ValueError("Control profiles live on different meshes.")
    return float(a.values @ (assemble_mass_1d(a.mesh) @ b.values))


def l2_norm(u: ControlProfile) -> float:
    return float(np.sqrt(max(l2_inner(u, u), 0.0)))


def project_Uad(u: ControlProfile, radius: float) -> ControlProfile:
    """
    Project *u* onto the closed ball of the given radius.

    Raises:
        ValueError: ``radius <= 0``.
    """
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius!r}.")
    norm = l2_norm(u)
    if norm <= radius:
        return u
    return u * (radius / norm)


def on_boundary(u: ControlProfile, radius: float, rtol: float = 1e-10) -> bool:
    """Whether *u* sits on the sphere of the admissible ball."""
    return abs(l2_norm(u) - radius) <= rtol * radius
