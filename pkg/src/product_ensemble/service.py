"""HTTP service exposing the same tables as the CLI."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .errors import ProductEnsembleError, ValidationError
from .runs import OPERATIONS
from .schemas import (BulkRequest, ContoursRequest, DensityRequest, EdgeRequest, KernelRequest,
                      OracleRequest, SampleRequest)

app = FastAPI(title="product_ensemble", version=__version__)


def _respond(name, req):
    try:
        table = OPERATIONS[name][1](req)
    except ValidationError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except ProductEnsembleError as exc:
        # numerical failure, not a bad request
        raise HTTPException(status_code=500, detail=f"{type(exc).__name__}: {exc}")
    return {"version": __version__, "config": req.model_dump(mode="json"),
            "summary": table.summary, "records": table.records()}


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/density")
def density(req: DensityRequest):
    return _respond("density", req)


@app.post("/kernel")
def kernel(req: KernelRequest):
    return _respond("kernel", req)


@app.post("/bulk")
def bulk(req: BulkRequest):
    return _respond("bulk", req)


@app.post("/edge")
def edge(req: EdgeRequest):
    return _respond("edge", req)


@app.post("/sample")
def sample(req: SampleRequest):
    return _respond("sample", req)


@app.post("/oracle")
def oracle(req: OracleRequest):
    return _respond("oracle", req)


@app.post("/contours")
def contours(req: ContoursRequest):
    return _respond("contours", req)
