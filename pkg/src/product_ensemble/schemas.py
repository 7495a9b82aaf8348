"""Request models shared by the HTTP service and the command line."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .spectral_model import ModelSpec, Variant

_MODEL_NAMES = {
    "ginibre": Variant.GinibreProduct,
    "inverses": Variant.WithInverses,
    "truncated": Variant.TruncatedUnitary,
}


class Grid(BaseModel):
    """Inclusive grid lo:hi:count."""
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float
    count: int = Field(ge=1)

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} is not lo:hi:count")
        return cls(lo=float(parts[0]), hi=float(parts[1]), count=int(parts[2]))

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.lo]
        step = (self.hi - self.lo) / (self.count - 1)
        return [self.lo + i * step for i in range(self.count - 1)] + [self.hi]


class ModelParams(BaseModel):
    model: str = "ginibre"
    n: int = Field(1, ge=1)
    M: int = Field(1, ge=1)
    K: int = Field(0, ge=0)
    nu: list[int] = []
    nutilde: list[int] = []
    kappa: int = 0

    @field_validator("model")
    @classmethod
    def _known(cls, v):
        key = v.lower()
        if key in _MODEL_NAMES:
            return key
        for name, var in _MODEL_NAMES.items():
            if v == var.value:
                return name
        raise ValueError(f"unknown model {v!r}; use one of {sorted(_MODEL_NAMES)}")

    def to_spec(self, n: int | None = None) -> ModelSpec:
        return ModelSpec(_MODEL_NAMES[self.model], self.n if n is None else n, self.M, self.K,
                         tuple(self.nu), tuple(self.nutilde), self.kappa)


class Numerics(BaseModel):
    panels: Optional[float] = Field(None, gt=0)
    order: Optional[int] = Field(None, ge=2)
    tol: Optional[float] = Field(None, gt=0)


class DensityRequest(ModelParams):
    grid: int = Field(200, ge=1)


class KernelRequest(ModelParams, Numerics):
    x_grid: Grid = Grid(lo=0.5, hi=3.0, count=3)
    y_grid: Optional[Grid] = None
    placement: Literal["auto", "direct", "switched", "bulk", "edge"] = "auto"


class BulkRequest(ModelParams, Numerics):
    x0: Optional[float] = None
    phi: Optional[float] = None
    xi_grid: Grid = Grid(lo=-2.0, hi=2.0, count=9)
    eta_grid: Optional[Grid] = None

    @model_validator(mode="after")
    def _one_location(self):
        if (self.x0 is None) == (self.phi is None):
            raise ValueError("give exactly one of x0 and phi")
        return self


class EdgeRequest(ModelParams, Numerics):
    xi_grid: Grid = Grid(lo=-3.0, hi=1.0, count=9)
    eta_grid: Optional[Grid] = None


class SampleRequest(ModelParams):
    trials: int = Field(ge=1)
    seed: int
    bins: int = Field(80, ge=5)
    output: Literal["histogram", "values", "edge"] = "histogram"


class OracleRequest(ModelParams):
    pass


class ContoursRequest(ModelParams):
    placement: Literal["direct", "switched", "bulk", "edge"] = "direct"
    x0: Optional[float] = None
    phi: Optional[float] = None
    samples: int = Field(200, ge=2)
