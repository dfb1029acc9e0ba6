"""Read-only retrieval service over a trained checkpoint and a built index.

The service never mutates artifacts: the CLI builds datasets, checkpoints,
and indexes; this module only answers queries against them. Bodies are
validated by hand so malformed input consistently yields 400 rather than a
framework-specific status.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from time import perf_counter

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .checkpoint import load_checkpoint
from .datafiles import load_dataset
from .perturb import Characteristic, PairSample, PerturbLevel, label_to_characteristic_level
from .queries import instantiate_template
from .retrieval import Index, embed_text_batch, load_index, search
from .train import restore_model
from .util import file_fingerprint

PREVIEW_MAX = 512


@dataclass
class ServiceState:
    model: object
    index: Index
    pairs: dict[str, PairSample]
    model_fingerprint: str


def load_state(checkpoint_path, index_path, dataset_dir) -> ServiceState:
    ckpt = load_checkpoint(checkpoint_path)
    model = restore_model(ckpt)
    index = load_index(index_path)
    fingerprint = file_fingerprint(checkpoint_path)
    if index.model_fingerprint and index.model_fingerprint != fingerprint:
        raise ValueError(
            f"index was built from a different checkpoint (index fingerprint "
            f"{index.model_fingerprint[:12]}..., checkpoint {fingerprint[:12]}...)"
        )
    splits = load_dataset(Path(dataset_dir))
    pairs = {p.pair_id: p for split in splits.values() for p in split}
    missing = [pid for pid in index.pair_ids if pid not in pairs]
    if missing:
        raise ValueError(f"index references pairs absent from the dataset: {missing[:5]}")
    return ServiceState(model=model, index=index, pairs=pairs, model_fingerprint=fingerprint)


def _preview(values: np.ndarray) -> list[float]:
    stride = -(-len(values) // PREVIEW_MAX)  # ceil division
    return [float(v) for v in values[::stride]]


def _pair_summary(pair: PairSample, score: float) -> dict:
    return {
        "pair_id": pair.pair_id,
        "score": score,
        "label": pair.label,
        "characteristic": pair.characteristic.value,
        "target_level": pair.target_level.value,
        "ref_preview": _preview(pair.ref.values),
        "tgt_preview": _preview(pair.tgt.values),
    }


def create_app(state: ServiceState | None = None) -> FastAPI:
    app = FastAPI(title="tsdiff retrieval service")
    # read-only, unauthenticated: safe to let the browser UI call from any origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    app.state.service = state

    def ready() -> ServiceState:
        if app.state.service is None:
            raise HTTPException(status_code=503, detail="service is still loading artifacts")
        return app.state.service

    @app.get("/health")
    def health():
        st = app.state.service
        if st is None:
            return {"status": "loading", "model_fingerprint": None, "index_size": 0}
        return {"status": "ready", "model_fingerprint": st.model_fingerprint, "index_size": len(st.index)}

    @app.get("/labels")
    def labels():
        out = []
        for label in range(1, 13):
            characteristic, level = label_to_characteristic_level(label)
            out.append(
                {
                    "label": label,
                    "characteristic": characteristic.value,
                    "direction": level.value,
                    "template": instantiate_template(characteristic, level),
                }
            )
        return out

    @app.get("/pairs/{pair_id}")
    def get_pair(pair_id: str):
        st = ready()
        pair = st.pairs.get(pair_id)
        if pair is None:
            raise HTTPException(status_code=404, detail=f"unknown pair id {pair_id!r}")
        return {
            "pair_id": pair.pair_id,
            "base_id": pair.base_id,
            "label": pair.label,
            "characteristic": pair.characteristic.value,
            "target_level": pair.target_level.value,
            "length": pair.ref.length,
            "ref": [float(v) for v in pair.ref.values],
            "tgt": [float(v) for v in pair.tgt.values],
        }

    @app.post("/search")
    async def do_search(request: Request):
        st = ready()
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="request body must be a JSON object")
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="request body must be a JSON object")
        query = body.get("query")
        if not isinstance(query, str) or not query.strip():
            raise HTTPException(status_code=400, detail="'query' must be a non-empty string")
        k = body.get("k", 10)
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= len(st.index):
            raise HTTPException(status_code=400, detail=f"'k' must be an integer in 1..{len(st.index)}")
        started = perf_counter()
        q_vec = embed_text_batch(st.model, [query])[0]
        ranked = search(st.index, q_vec, k)
        results = [_pair_summary(st.pairs[pid], score) for pid, score in ranked.items]
        return JSONResponse(
            {
                "results": results,
                "model_fingerprint": st.model_fingerprint,
                "latency_s": perf_counter() - started,
            }
        )

    return app
