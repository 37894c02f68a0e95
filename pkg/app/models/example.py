import numpy as np
from pydantic import Field

from app.models.base import UncertainModel


class ExampleLinearModel(UncertainModel):
    """
    Single-variable model that interpolates two states linearly in U.

    Q(s, U) = Q1(s) lam + Q2(s) (1 - lam), lam = (U_U - U) / (U_U - U_L),
    with Q1(s) = 30 + 0.1 s and Q2(s) = 50 - 0.2 s. At s = 0 this is Q = 200 U + 10.
    """

    name: str = "example"
    n_design: int = 1
    u_lower: float = 0.1
    u_upper: float = 0.2

    q1_level: float = Field(30.0, description="Q1 at s = 0")
    q1_slope: float = Field(0.1, description="dQ1/ds")
    q2_level: float = Field(50.0, description="Q2 at s = 0")
    q2_slope: float = Field(-0.2, description="dQ2/ds")

    def state_values(self, s: float):
        return self.q1_level + self.q1_slope * s, self.q2_level + self.q2_slope * s

    def _evaluate(self, s, us):
        q1, q2 = self.state_values(s[0])
        lam = (self.u_upper - us) / (self.u_upper - self.u_lower)
        q = q1 * lam + q2 * (1.0 - lam)
        dq_ds = self.q1_slope * lam + self.q2_slope * (1.0 - lam)
        return q, dq_ds[:, None]
