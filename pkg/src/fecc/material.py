"""Isotropic linear-elastic material parameters."""

from __future__ import annotations

from dataclasses import dataclass


def lame_constants(E: float, nu: float):
    """First Lame constant and shear modulus from Young's modulus and Poisson ratio.

    lambda = nu E / ((1 + nu)(1 - 2 nu)),  mu = E / (2 (1 + nu)).
    Requires E > 0 and 0 <= nu < 0.5 (lambda diverges at nu = 0.5).
    """
    if E <= 0.0:
        raise ValueError(f"Young's modulus must be positive, got {E}")
    if not 0.0 <= nu < 0.5:
        raise ValueError(f"Poisson ratio must lie in [0, 0.5), got {nu}")
    lam = nu * E / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    return lam, mu


@dataclass(frozen=True)
class MaterialParams:
    E: float
    nu: float
    lam: float
    mu: float

    @classmethod
    def from_young_poisson(cls, E: float, nu: float) -> "MaterialParams":
        lam, mu = lame_constants(E, nu)
        return cls(E=E, nu=nu, lam=lam, mu=mu)

    @classmethod
    def from_lame(cls, lam: float, mu: float) -> "MaterialParams":
        if mu <= 0.0 or lam < 0.0:
            raise ValueError(f"need mu > 0 and lam >= 0, got lam={lam}, mu={mu}")
        E = mu * (3.0 * lam + 2.0 * mu) / (lam + mu)
        nu = lam / (2.0 * (lam + mu))
        return cls(E=E, nu=nu, lam=lam, mu=mu)
