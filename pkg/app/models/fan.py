"""Synthetic fan-stage surrogate with rear-seal leakage as the uncertainty.

Not a calibration of any real fan. It keeps the structure that matters for
density matching: root efficiency falls monotonically with leakage, and the
design variables move both the efficiency level and its sensitivity to leakage.
"""

from functools import cached_property
import numpy as np
from pydantic import Field, model_validator

from app.exceptions import DomainError, ModelError
from app.models.base import UncertainModel


def fan_root_efficiency(pr, tr, gamma: float = 1.4):
    """eta = (PR^((gamma-1)/gamma) - 1) / (TR - 1); gamma is the heat-capacity ratio."""
    pr = np.asarray(pr, dtype=float)
    tr = np.asarray(tr, dtype=float)
    if np.any(tr <= 1):
        raise DomainError("temperature ratio must exceed 1")
    if np.any(pr <= 0):
        raise DomainError("pressure ratio must be positive")
    eta = (pr ** ((gamma - 1) / gamma) - 1) / (tr - 1)
    return eta if eta.ndim else float(eta)


class SyntheticFanModel(UncertainModel):
    """
    PR(s, U) = pr0 (1 + m(s)) (1 - sigma(s) x),  TR(s) = tr0 (1 + e . s),
    with x = (U - U_L) / (U_U - U_L), m(s) = c . s + 0.5 q . s^2 and
    sigma(s) = sigma0 exp(d . s). Design box is [-1, 1]^n.
    """

    name: str = "fan"
    n_design: int = 4
    u_lower: float = 0.0013
    u_upper: float = 0.0030

    seed: int = Field(0, description="Seed for the design coefficients")
    gamma: float = Field(1.4, gt=1, description="Heat-capacity ratio")
    pr0: float = Field(1.5, gt=1, description="Nominal root pressure ratio")
    tr0: float = Field(1.1365, gt=1, description="Nominal root temperature ratio")
    sigma0: float = Field(
        0.004, gt=0, description="Fractional PR loss across the leakage range"
    )
    slope_authority: float = Field(
        1.2, gt=0, description="Sum of |d_k|: log-range of the leakage sensitivity"
    )

    @model_validator(mode="before")
    @classmethod
    def default_box(cls, data):
        if isinstance(data, dict):
            n = data.get("n_design", cls.model_fields["n_design"].default)
            data.setdefault("design_lower", [-1.0] * n)
            data.setdefault("design_upper", [1.0] * n)
        return data

    @model_validator(mode="after")
    def check_slope_control(self) -> "SyntheticFanModel":
        ratio = self.slope_reduction_ratio()
        if ratio > 0.5:
            raise ModelError(
                f"design box only reduces the leakage slope to {ratio:.2f} of nominal"
            )
        return self

    @cached_property
    def coefficients(self):
        rng = np.random.default_rng(self.seed)
        n = self.n_design
        c = rng.uniform(-0.004, 0.004, n)
        q = rng.uniform(-0.004, -0.001, n)
        d = rng.uniform(0.5, 1.0, n) * rng.choice([-1.0, 1.0], n)
        d *= self.slope_authority / np.abs(d).sum()
        e = rng.uniform(-0.003, 0.003, n)
        for array in (c, q, d, e):
            array.setflags(write=False)
        return c, q, d, e

    def _ratios(self, s, us):
        c, q, d, e = self.coefficients
        x = (us - self.u_lower) / (self.u_upper - self.u_lower)
        level = 1.0 + c @ s + 0.5 * q @ (s * s)
        sigma = self.sigma0 * np.exp(d @ s)
        pr = self.pr0 * level * (1.0 - sigma * x)
        tr = self.tr0 * (1.0 + e @ s)
        # dPR/ds_k and dTR/ds_k
        dlevel = c + q * s
        dpr = self.pr0 * (
            np.outer(1.0 - sigma * x, dlevel) - level * sigma * np.outer(x, d)
        )
        dtr = self.tr0 * e
        return pr, tr, dpr, dtr

    def _evaluate(self, s, us):
        pr, tr, dpr, dtr = self._ratios(s, us)
        k = (self.gamma - 1) / self.gamma
        eta = np.atleast_1d(fan_root_efficiency(pr, tr, self.gamma))
        deta = (k * pr ** (k - 1))[:, None] * dpr / (tr - 1) - np.outer(
            eta / (tr - 1), dtr
        )
        return eta, deta

    def leakage_slope(self, s) -> float:
        """d eta / dU, constant in U up to the curvature of PR^k."""
        s = self.check_design(s)
        eta, _ = self._evaluate(s, np.array([self.u_lower, self.u_upper]))
        return float((eta[1] - eta[0]) / (self.u_upper - self.u_lower))

    def slope_reduction_ratio(self) -> float:
        """|slope| at the flattest box corner relative to the box centre."""
        _, _, d, _ = self.coefficients
        centre = np.zeros(self.n_design)
        corner = -np.sign(d)
        return abs(self.leakage_slope(corner)) / abs(self.leakage_slope(centre))
