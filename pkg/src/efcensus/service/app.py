"""HTTP face of the census engine.

Thin endpoint layer: every route validates its body with the models in
`models`, calls the corresponding core operation, and converts the result.
Capacity failures surface as 409 with the byte requirement and the split
suggestion so the caller can retry; bad parameters surface as 422.
"""

from __future__ import annotations

from functools import lru_cache

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..bounds import CHECK_GROUPS, run_check_group
from ..census import census_run
from ..doubling import (
    bundled_certificates,
    certified_doubling,
    doubling_from_counts,
    format_certificate,
    verify_nonmembership,
)
from ..errors import CapacityError
from ..tables import (
    growth_histogram,
    load_reference_table,
    ratio_series,
    verify_prefix,
)
from .models import (
    BoundsRequest,
    BoundsResponse,
    CensusRequest,
    CensusResponse,
    CensusRowModel,
    DoublingRequest,
    DoublingResponse,
    HistogramResponse,
    RatioPoint,
    RatioResponse,
    ReportModel,
    VerifyRequest,
    VerifyResponse,
)


@lru_cache(maxsize=1)
def _reference():
    return load_reference_table()


def _run_census(nmax, budget=None, split=None, symmetry=False):
    try:
        return census_run(nmax, budget=budget, split_modulus=split,
                          symmetry=symmetry)
    except CapacityError as exc:
        raise HTTPException(status_code=409, detail={
            "message": str(exc),
            "required_bytes": exc.required_bytes,
            "suggested_split": exc.suggested_split,
        })
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def create_app() -> FastAPI:
    app = FastAPI(title="efcensus", version=__version__)

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/census", response_model=CensusResponse)
    def census(req: CensusRequest) -> CensusResponse:
        table = _run_census(req.nmax, req.budget, req.split, req.symmetry)
        return CensusResponse(rows=[
            CensusRowModel(N=r.N, count=r.count, doubles=r.doubles,
                           removed=r.removed)
            for r in table.rows])

    @app.post("/v1/doubling", response_model=DoublingResponse)
    def doubling(req: DoublingRequest) -> DoublingResponse:
        if req.source == "table":
            counts = _reference().counts_dict()
        else:
            counts = _run_census(req.nmax).counts_dict()
        members = doubling_from_counts(counts)
        if not req.certify:
            return DoublingResponse(members=members)

        # Chains and identities must partition [1, hi] exactly.
        hi = min(100, max(counts))
        chains = certified_doubling(hi)
        ok = sorted(chains) == [m for m in members if m <= hi]
        ok = ok and all(c.verify() for c in chains.values())
        certs = bundled_certificates()
        lines = []
        for n in range(1, hi + 1):
            if n in chains:
                continue
            cert = certs.get(n)
            if cert is None or not verify_nonmembership(cert):
                ok = False
                continue
            lines.append(format_certificate(cert))
        return DoublingResponse(members=members, certificates=lines,
                                certified=ok)

    @app.post("/v1/bounds", response_model=BoundsResponse)
    def bounds(req: BoundsRequest) -> BoundsResponse:
        counts = _reference().counts_dict()
        members = doubling_from_counts(counts)
        tokens = CHECK_GROUPS if req.checks == "all" else (req.checks,)
        reports = [run_check_group(t, members=members, counts=counts)
                   for t in tokens]
        return BoundsResponse(
            reports=[ReportModel.from_report(r) for r in reports],
            passed=all(r.passed for r in reports))

    @app.get("/v1/report/histogram", response_model=HistogramResponse)
    def histogram() -> HistogramResponse:
        bins, flagged = growth_histogram(_reference())
        return HistogramResponse(bins=list(bins), flagged=flagged)

    @app.get("/v1/report/ratio", response_model=RatioResponse)
    def ratio() -> RatioResponse:
        return RatioResponse(points=[
            RatioPoint(N=n, y=y) for n, y in ratio_series(_reference())])

    @app.post("/v1/report/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        table = _run_census(req.nmax)
        return VerifyResponse(
            report=ReportModel.from_report(verify_prefix(table, _reference())))

    return app


app = create_app()
