"""Request and response bodies for the census service.

Counts are arbitrary-precision integers and cross the wire as JSON numbers;
both pydantic and the stdlib json module round-trip them exactly, so no
string encoding is needed.  Check rows carry both sides of their inequality
as floats whose shortest repr survives the JSON round trip unchanged.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

from ..reporting import BoundReport


class CensusRequest(BaseModel):
    nmax: int = Field(60, ge=1)
    budget: Optional[int] = Field(None, ge=1,
                                  description="bitmap budget in bytes")
    split: Union[Literal["auto"], int, None] = Field(
        None, description="splitting modulus: a prime, 'auto', or null")
    symmetry: bool = False


class CensusRowModel(BaseModel):
    N: int
    count: int
    doubles: bool
    removed: bool


class CensusResponse(BaseModel):
    rows: list[CensusRowModel]


class DoublingRequest(BaseModel):
    source: Literal["table", "census"] = "table"
    nmax: int = Field(60, ge=1,
                      description="census range when source='census'")
    certify: bool = False


class DoublingResponse(BaseModel):
    """Doubling indices, plus the certification cross-check when asked.

    With certify on, members up to min(100, range top) are matched against
    the closure of membership chains, every chain is reverified, and each
    excluded N gets its signed identity line; `certified` reports whether
    the partition is exact.
    """

    members: list[int]
    certificates: list[str] = []
    certified: Optional[bool] = None


class BoundsRequest(BaseModel):
    checks: Literal["all", "3c", "6c", "7c", "9c", "t1"] = "all"


class CheckRowModel(BaseModel):
    check: str
    point: str
    lhs: float
    rhs: float
    passed: bool


class ReportModel(BaseModel):
    name: str
    checked_range: str
    margin: Optional[float]
    passed: bool
    rows: list[CheckRowModel]

    @classmethod
    def from_report(cls, rep: BoundReport) -> "ReportModel":
        return cls(
            name=rep.name,
            checked_range=rep.checked_range,
            margin=rep.margin,
            passed=rep.passed,
            rows=[CheckRowModel(check=r.check, point=r.point, lhs=r.lhs,
                                rhs=r.rhs, passed=r.passed)
                  for r in rep.rows],
        )


class BoundsResponse(BaseModel):
    reports: list[ReportModel]
    passed: bool


class HistogramResponse(BaseModel):
    bins: list[int]  # ten growth-ratio deciles
    flagged: list[int]


class RatioPoint(BaseModel):
    N: int
    y: float


class RatioResponse(BaseModel):
    points: list[RatioPoint]


class VerifyRequest(BaseModel):
    nmax: int = Field(60, ge=1)


class VerifyResponse(BaseModel):
    report: ReportModel
