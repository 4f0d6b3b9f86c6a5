import pandas as pd
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from src import inference
from src.config import DEFAULT_ALPHA, DEFAULT_SEED, DEFAULT_SPLIT_FRACTION
from src.dataset import Dataset
from src.errors import CatError
from src.models import (
    ConfidenceReport,
    EntropyConfig,
    FitReport,
    ScoreKind,
    SmootherConfig,
    TestReport,
)
from src.pipeline import confidence_region, fit_tree

app = FastAPI(
    title="Causal Additive Trees",
    description="API de aprendizado de árvores causais aditivas e inferência sobre a estrutura",
    version="0.1.0",
)


class DataPayload(BaseModel):
    columns: list[str]
    rows: list[list[float]]
    standardize: bool = False
    smoother: SmootherConfig = SmootherConfig()


class FitRequest(DataPayload):
    score: ScoreKind = ScoreKind.GAUSSIAN
    entropy: EntropyConfig = EntropyConfig()


class ConfidenceRequest(DataPayload):
    alpha: float = DEFAULT_ALPHA
    split_fraction: float = DEFAULT_SPLIT_FRACTION
    seed: int = DEFAULT_SEED


class HypothesisRequest(ConfidenceRequest):
    constraints: list[str] = Field(default_factory=list)


def _dataset(payload: DataPayload) -> Dataset:
    return Dataset.from_frame(pd.DataFrame(payload.rows, columns=payload.columns))


def _region(request: ConfidenceRequest) -> inference.ConfidenceRegion:
    return confidence_region(
        _dataset(request),
        alpha=request.alpha,
        fraction=request.split_fraction,
        seed=request.seed,
        smoother_cfg=request.smoother,
        standardize=request.standardize,
    )


def _bad_request(e: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(e))


@app.get("/health")
async def health_check():
    return {"status": "ok", "service": "causal-additive-trees"}


@app.post("/fit", response_model=FitReport)
def fit(request: FitRequest):
    try:
        fitted = fit_tree(_dataset(request), request.score, request.smoother, request.entropy,
                          standardize=request.standardize)
        return fitted.to_model()
    except (CatError, ValueError) as e:
        raise _bad_request(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/confidence", response_model=ConfidenceReport)
def confidence(request: ConfidenceRequest):
    try:
        return _region(request).to_model()
    except (CatError, ValueError) as e:
        raise _bad_request(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/test", response_model=TestReport)
def substructure_test(request: HypothesisRequest):
    try:
        return inference.test_substructure(_region(request), request.constraints)
    except (CatError, ValueError) as e:
        raise _bad_request(e)
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@app.get("/")
async def root():
    return {
        "message": "Causal Additive Trees",
        "endpoints": {
            "POST /fit": "Estima a árvore causal a partir de colunas e linhas",
            "POST /confidence": "Intervalos simultâneos dos pesos de aresta",
            "POST /test": "Teste de hipótese de subestrutura",
            "GET /health": "Status da API",
        },
    }
