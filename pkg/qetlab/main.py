"""
qetlab JSON API.

A read-only FastAPI service over the same operations the command line wraps:
closed-form model quantities, protocol runs, the passivity probe and noisy runs.
"""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from qetlab import __version__, config
from qetlab.circuits import resolve_ordering
from qetlab.routers import model, noise, passivity, protocols

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Resolve the gate ordering once on startup so the first request does not pay for it.
    """
    config.configure_logging()
    logger.info("Starting qetlab API %s (%s)", __version__, resolve_ordering().describe())
    yield
    logger.info("Shutting down qetlab API")


app = FastAPI(
    title="qetlab",
    description=(
        "Quantum energy teleportation on strong local passive states: minimal and "
        "fully unitary protocols, passivity probe and decoherence studies."
    ),
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET"],
    allow_headers=["*"],
)

app.include_router(model.router)
app.include_router(protocols.router)
app.include_router(passivity.router)
app.include_router(noise.router)


@app.get("/api", summary="API Information", tags=["API Info"])
@app.get("/api/info", summary="API Information", tags=["API Info"])
async def api_info() -> dict:
    """
    Get API information and available endpoints.

    Returns:
        dict: API metadata including version and available endpoint URLs.
    """
    return {
        "message": "qetlab API",
        "version": __version__,
        "endpoints": {
            "model": "/api/model",
            "minimal_protocol": "/api/protocols/minimal",
            "unitary_protocol": "/api/protocols/unitary",
            "equivalence": "/api/protocols/equivalence",
            "timing": "/api/protocols/timing",
            "passivity_probe": "/api/passivity/probe",
            "noisy_unitary": "/api/noise/unitary",
            "docs": "/docs",
            "redoc": "/redoc",
        },
    }


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "message": "qetlab API is running", "version": __version__}
