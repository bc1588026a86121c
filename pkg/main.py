from typing import Literal

from fastapi import FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware

from controllers.bench_controller import BenchRequest, run_bench_endpoint, spectrum_endpoint
from core.config.settings import configure_logging

# Environment variables are loaded by core.config.settings (python-dotenv)
configure_logging()

# Initialize FastAPI app
app = FastAPI(
    title="Tall-Skinny SVD Bench API",
    description="Randomized and Gram-based SVDs of block-row matrices, with accuracy benchmarks",
    version="0.1.0"
)

origins = [
    "*"
]

app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

# Root endpoint
@app.get("/")
async def root():
    return {"message": "Welcome to the Tall-Skinny SVD Bench API"}

# Run Benchmark Endpoint
@app.post("/bench/run")
async def run_bench(request: BenchRequest):
    return await run_bench_endpoint(request)

# Spectrum Values Endpoint
@app.get("/spectrum")
async def spectrum(
        variant: Literal["exp", "staircase"] = Query("exp", description="Spectrum shape: exp or staircase."),
        k: int = Query(..., description="Number of singular values to list."),
    ):
    return await spectrum_endpoint(variant, k)
