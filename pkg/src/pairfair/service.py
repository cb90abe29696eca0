"""HTTP judgment-collection service.

Serves record pairs to judges (features only, never labels), appends
judgments to a per-session line-oriented log (acknowledged only after the
write is flushed to disk), and exposes sweep results for the browser UI.
Pair assignment is a pure function of (session seed, judge id), so a
restarted service resumes exactly where it left off given the logs.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .data import (Dataset, JudgeResponse, PairSet, load_dataset,
                   read_judgments, sample_pairs, stable_seed)
from .solver import read_curve


class DuplicateJudgment(ValueError):
    pass


class UnpresentedPair(ValueError):
    pass


class NoResults(LookupError):
    pass


@dataclass
class SessionConfig:
    session_id: str
    dataset_path: str
    label_column: str = "label"
    seed: int = 0
    pairs_per_judge: int = 50
    pair_budget: int = 200

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "dataset_path": self.dataset_path,
            "label_column": self.label_column,
            "seed": self.seed,
            "pairs_per_judge": self.pairs_per_judge,
            "pair_budget": self.pair_budget,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SessionConfig":
        return cls(
            session_id=str(payload["session_id"]),
            dataset_path=str(payload["dataset_path"]),
            label_column=str(payload.get("label_column", "label")),
            seed=int(payload.get("seed", 0)),
            pairs_per_judge=int(payload.get("pairs_per_judge", 50)),
            pair_budget=int(payload.get("pair_budget", 200)),
        )


class Session:
    """One elicitation session: dataset, sampled pair pool, response log."""

    def __init__(self, directory: Path, config: SessionConfig):
        self.directory = directory
        self.config = config
        self.dataset: Dataset = load_dataset(config.dataset_path,
                                             config.label_column)
        if config.pair_budget < config.pairs_per_judge:
            raise ValueError("pair_budget must be >= pairs_per_judge")
        self.pair_set: PairSet = sample_pairs(self.dataset.n,
                                              config.pair_budget, config.seed)
        self.log_path = directory / "judgments.jsonl"
        self.lock = threading.Lock()
        self.responses: list[JudgeResponse] = []
        self._keys: set[tuple[str, int, int]] = set()
        if self.log_path.exists():
            for r in read_judgments(str(self.log_path)):
                self.responses.append(r)
                self._keys.add((r.judge_id, min(r.i, r.j), max(r.i, r.j)))

    def assigned_pairs(self, judge_id: str) -> np.ndarray:
        """The judge's full quota, a pure function of (seed, judge_id)."""
        rng = np.random.default_rng(
            stable_seed(self.config.seed, "assign", judge_id))
        perm = rng.permutation(self.pair_set.num_unordered)
        return self.pair_set.pairs[perm[: self.config.pairs_per_judge]]

    def get_pairs(self, judge_id: str, count: int) -> list[dict]:
        if count > self.config.pairs_per_judge:
            raise ValueError(
                f"count {count} exceeds the per-judge pair budget "
                f"{self.config.pairs_per_judge}")
        if count < 1:
            raise ValueError("count must be >= 1")
        names = self.dataset.feature_names
        rows = self.dataset.features
        payloads = []
        for i, j in self.assigned_pairs(judge_id)[:count]:
            payloads.append({
                "i": int(i),
                "j": int(j),
                "left": {name: float(v) for name, v in zip(names, rows[i])},
                "right": {name: float(v) for name, v in zip(names, rows[j])},
            })
        return payloads

    def post_judgment(self, response: JudgeResponse) -> int:
        """Durably append one response; returns the new log length."""
        key = (response.judge_id, min(response.i, response.j),
               max(response.i, response.j))
        with self.lock:
            assigned = {(min(i, j), max(i, j))
                        for i, j in self.assigned_pairs(response.judge_id)}
            if (key[1], key[2]) not in assigned:
                raise UnpresentedPair(
                    f"pair ({response.i}, {response.j}) was not presented "
                    f"to judge {response.judge_id!r}")
            if key in self._keys:
                raise DuplicateJudgment(
                    f"judge {response.judge_id!r} already answered "
                    f"pair ({key[1]}, {key[2]})")
            line = json.dumps({"judge_id": response.judge_id,
                               "i": response.i, "j": response.j,
                               "same": response.same}) + "\n"
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            self._keys.add(key)
            self.responses.append(response)
            return len(self.responses)

    def judge_counts(self) -> dict[str, dict[str, int]]:
        counts: dict[str, dict[str, int]] = {}
        for r in self.responses:
            entry = counts.setdefault(r.judge_id, {"answered": 0, "same": 0})
            entry["answered"] += 1
            entry["same"] += int(r.same)
        return counts

    def results(self) -> dict:
        curve_path = self.directory / "results.csv"
        meta_path = self.directory / "results_meta.json"
        if not curve_path.exists():
            raise NoResults("no sweep results for this session yet")
        points = read_curve(str(curve_path))
        meta = {}
        if meta_path.exists():
            with open(meta_path, encoding="utf-8") as fh:
                meta = json.load(fh)
        return {
            "rows": [{
                "gamma": p.gamma, "eta": p.eta, "error": p.error,
                "max_violation": p.max_violation,
                "weighted_slack": p.weighted_slack,
                "fairness_loss": p.fairness_loss,
            } for p in points],
            "judge_counts": self.judge_counts(),
            "constraints_hash": meta.get("constraints_hash"),
            "gamma_grid": meta.get("gamma_grid"),
            "eta_grid": meta.get("eta_grid"),
        }

    def info(self) -> dict:
        return {
            "session_id": self.config.session_id,
            "feature_names": self.dataset.feature_names,
            "num_rows": self.dataset.n,
            "pairs_per_judge": self.config.pairs_per_judge,
            "pair_budget": self.config.pair_budget,
            "total_responses": len(self.responses),
        }


class SessionStore:
    """Sessions live in subdirectories of a root; logs are the only state."""

    def __init__(self, root: str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def session_dir(self, session_id: str) -> Path:
        return self.root / session_id

    def create(self, config: SessionConfig) -> Session:
        directory = self.session_dir(config.session_id)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "session.json", "w", encoding="utf-8") as fh:
            json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return self.get(config.session_id)

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id in self._sessions:
                return self._sessions[session_id]
            config_path = self.session_dir(session_id) / "session.json"
            if not config_path.exists():
                raise KeyError(f"unknown session {session_id!r}")
            with open(config_path, encoding="utf-8") as fh:
                config = SessionConfig.from_dict(json.load(fh))
            session = Session(self.session_dir(session_id), config)
            self._sessions[session_id] = session
            return session


class JudgmentBody(BaseModel):
    judge_id: str
    i: int
    j: int
    same: bool


def create_app(store: SessionStore, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="pairfair judgment service")

    def _session(session_id: str) -> Session:
        try:
            return store.get(session_id)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/sessions/{session_id}")
    def session_info(session_id: str):
        return _session(session_id).info()

    @app.get("/api/sessions/{session_id}/pairs")
    def get_pairs(session_id: str, judge_id: str, count: int = 50):
        session = _session(session_id)
        try:
            return {"pairs": session.get_pairs(judge_id, count)}
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/api/sessions/{session_id}/judgments")
    def post_judgment(session_id: str, body: JudgmentBody):
        session = _session(session_id)
        try:
            response = JudgeResponse(body.judge_id, body.i, body.j, body.same)
            total = session.post_judgment(response)
        except DuplicateJudgment as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (UnpresentedPair, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"status": "recorded", "total_responses": total}

    @app.get("/api/sessions/{session_id}/results")
    def get_results(session_id: str):
        session = _session(session_id)
        try:
            return session.results()
        except NoResults as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
