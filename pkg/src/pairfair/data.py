"""Dataset ingestion, pair sampling, judgment aggregation, and synthetic judges."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np
import pandas as pd


def stable_seed(*parts) -> int:
    """Derive a 63-bit seed from arbitrary parts, stable across processes."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class Dataset:
    """A sample of n feature vectors with binary labels."""

    features: np.ndarray        # (n, d) float64
    labels: np.ndarray          # (n,) int8, values in {0, 1}
    feature_names: list[str]

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise ValueError("dataset needs at least one row and one feature")
        if self.labels.shape != (n,):
            raise ValueError("labels length must match feature rows")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite values")
        if len(self.feature_names) != d:
            raise ValueError("feature_names length must match feature columns")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


def load_dataset(path: str, label_column: str = "label") -> Dataset:
    """Read a CSV with a header row into a Dataset.

    Non-label columns must already be numeric; categorical columns have to be
    encoded upstream. Row order is preserved.
    """
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise FileNotFoundError(f"dataset file not found: {path}")
    except pd.errors.EmptyDataError:
        raise ValueError(f"empty dataset file: {path}")
    if frame.shape[0] == 0:
        raise ValueError(f"dataset has no rows: {path}")
    if label_column not in frame.columns:
        raise ValueError(f"label column {label_column!r} not in header")
    labels_raw = frame[label_column]
    labels_num = pd.to_numeric(labels_raw, errors="coerce")
    if labels_num.isna().any() or not labels_num.isin((0, 1)).all():
        bad = labels_raw[~labels_num.isin((0, 1))].iloc[0]
        raise ValueError(f"invalid label {bad!r}: labels must be 0 or 1")
    feature_frame = frame.drop(columns=[label_column])
    if feature_frame.shape[1] == 0:
        raise ValueError("dataset has no feature columns")
    for col in feature_frame.columns:
        values = pd.to_numeric(feature_frame[col], errors="coerce")
        if values.isna().any():
            bad_idx = int(values.isna().to_numpy().argmax())
            raise ValueError(
                f"non-numeric feature cell in column {col!r}, row {bad_idx}: "
                f"{feature_frame[col].iloc[bad_idx]!r} (encode categoricals first)"
            )
    features = feature_frame.to_numpy(dtype=np.float64)
    if not np.isfinite(features).all():
        raise ValueError("features contain non-finite values")
    return Dataset(features, labels_num.to_numpy(dtype=np.int8),
                   [str(c) for c in feature_frame.columns])


@dataclass
class PairSet:
    """Distinct unordered index pairs over [n], stored canonically (i < j).

    The symmetric closure is materialized on read via ordered_pairs(), so
    downstream sums can run over ordered pairs.
    """

    n: int
    pairs: np.ndarray           # (m, 2) int64, each row i < j, rows distinct

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if self.pairs.size and (
            (self.pairs[:, 0] >= self.pairs[:, 1]).any()
            or (self.pairs < 0).any()
            or (self.pairs >= self.n).any()
        ):
            raise ValueError("pairs must satisfy 0 <= i < j < n")
        seen = set(map(tuple, self.pairs.tolist()))
        if len(seen) != len(self.pairs):
            raise ValueError("duplicate pair")
        self._canon = seen

    @property
    def num_unordered(self) -> int:
        return len(self.pairs)

    @property
    def num_ordered(self) -> int:
        return 2 * len(self.pairs)

    def ordered_pairs(self) -> np.ndarray:
        """Symmetric closure, sorted lexicographically: shape (2m, 2)."""
        if not len(self.pairs):
            return np.empty((0, 2), dtype=np.int64)
        both = np.vstack([self.pairs, self.pairs[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        return both[order]

    def contains(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._canon


def sample_pairs(n: int, pairs_per_session: int, seed: int) -> PairSet:
    """Draw m distinct unordered pairs uniformly without replacement."""
    if n < 2:
        raise ValueError("need n >= 2 to form pairs")
    total = n * (n - 1) // 2
    m = pairs_per_session
    if not 1 <= m <= total:
        raise ValueError(f"pairs_per_session must be in [1, {total}], got {m}")
    rng = np.random.default_rng(seed)
    if total <= 1_000_000:
        all_pairs = np.array([(i, j) for i in range(n) for j in range(i + 1, n)],
                             dtype=np.int64)
        idx = rng.choice(total, size=m, replace=False)
        chosen = all_pairs[idx]
    else:
        # rejection sampling; m is far below total in this regime
        seen: set[tuple[int, int]] = set()
        rows = []
        while len(rows) < m:
            i = int(rng.integers(n))
            j = int(rng.integers(n))
            if i == j:
                continue
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            rows.append(key)
        chosen = np.array(rows, dtype=np.int64)
    return PairSet(n=n, pairs=chosen)


@dataclass(frozen=True)
class JudgeResponse:
    judge_id: str
    i: int
    j: int
    same: bool

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("a response pair must reference two distinct rows")


@dataclass
class ConstraintSet:
    """Aggregated same-judgments: canonical pairs with empirical weights.

    weights(i, j) = fraction of judges who marked the pair "same". Pairs
    never marked same carry no constraint and are not stored. num_ordered
    counts the symmetric closure, which is the denominator used by the
    weighted-slack terms downstream.
    """

    n: int
    pairs: np.ndarray           # (p, 2) int64, canonical i < j, lexsorted
    counts: np.ndarray          # (p,) int64, same-votes per pair, all >= 1
    num_judges: int

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if self.num_judges < 1:
            raise ValueError("num_judges must be positive")
        if len(self.pairs) != len(self.counts):
            raise ValueError("pairs and counts length mismatch")
        if self.pairs.size:
            if (self.pairs[:, 0] >= self.pairs[:, 1]).any() or (self.pairs < 0).any():
                raise ValueError("pairs must satisfy 0 <= i < j")
            if (self.pairs >= self.n).any():
                raise ValueError("pair index out of range")
            order = np.lexsort((self.pairs[:, 1], self.pairs[:, 0]))
            self.pairs = self.pairs[order]
            self.counts = self.counts[order]
        if (self.counts < 1).any() or (self.counts > self.num_judges).any():
            raise ValueError("counts must lie in [1, num_judges]")
        self._weight_map = {
            (int(i), int(j)): c / self.num_judges
            for (i, j), c in zip(self.pairs, self.counts)
        }

    @property
    def weights(self) -> np.ndarray:
        """Weights for canonical pairs, aligned with self.pairs."""
        return self.counts / self.num_judges

    @property
    def num_unordered(self) -> int:
        return len(self.pairs)

    @property
    def num_ordered(self) -> int:
        """|A|: the constrained ordered pairs (symmetric closure)."""
        return 2 * len(self.pairs)

    def ordered_pairs(self) -> np.ndarray:
        """Symmetric closure sorted lexicographically; shape (|A|, 2).

        This ordering is the canonical coordinate order for every per-pair
        vector in the solver (dual variables, slacks, disparities), and ties
        in argmax scans are broken by position in it.
        """
        if not len(self.pairs):
            return np.empty((0, 2), dtype=np.int64)
        both = np.vstack([self.pairs, self.pairs[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        return both[order]

    def ordered_weights(self) -> np.ndarray:
        """Weights aligned with ordered_pairs(); symmetric by construction."""
        op = self.ordered_pairs()
        return np.array([self._weight_map[(min(i, j), max(i, j))]
                         for i, j in op], dtype=np.float64)

    def weight(self, i: int, j: int) -> float:
        """w(i, j); zero for pairs without a same-judgment."""
        return self._weight_map.get((min(i, j), max(i, j)), 0.0)

    def to_dict(self) -> dict:
        return {
            "num_judges": self.num_judges,
            "n": self.n,
            "pairs": [
                {"i": int(i), "j": int(j), "weight": c / self.num_judges}
                for (i, j), c in zip(self.pairs, self.counts)
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ConstraintSet":
        num_judges = int(payload["num_judges"])
        pairs, counts = [], []
        for row in payload["pairs"]:
            count = round(float(row["weight"]) * num_judges)
            if abs(count - float(row["weight"]) * num_judges) > 1e-9:
                raise ValueError(
                    f"weight {row['weight']} is not a multiple of 1/{num_judges}")
            if count == 0:
                continue
            pairs.append((int(row["i"]), int(row["j"])))
            counts.append(count)
        n = int(payload["n"]) if "n" in payload else (
            max((max(p) for p in pairs), default=0) + 1)
        return cls(n=n, pairs=np.array(pairs, dtype=np.int64).reshape(-1, 2),
                   counts=np.array(counts, dtype=np.int64), num_judges=num_judges)

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def build_constraints(responses, pair_set: PairSet, num_judges: int) -> ConstraintSet:
    """Aggregate judge responses into constraint weights.

    Only "same" answers create constraints. At most one response per
    (judge, unordered pair); every response pair must belong to pair_set.
    """
    if num_judges < 1:
        raise ValueError("num_judges must be positive")
    judges = {r.judge_id for r in responses}
    if len(judges) > num_judges:
        raise ValueError(
            f"{len(judges)} distinct judges exceed num_judges={num_judges}")
    seen: set[tuple[str, int, int]] = set()
    counts: dict[tuple[int, int], int] = {}
    for r in responses:
        key = (min(r.i, r.j), max(r.i, r.j))
        if not pair_set.contains(r.i, r.j):
            raise ValueError(f"response pair {key} is outside the session pair set")
        dedup = (r.judge_id, *key)
        if dedup in seen:
            raise ValueError(f"duplicate response from {r.judge_id!r} on pair {key}")
        seen.add(dedup)
        if r.same:
            counts[key] = counts.get(key, 0) + 1
    pairs = np.array(sorted(counts), dtype=np.int64).reshape(-1, 2)
    count_arr = np.array([counts[tuple(p)] for p in pairs], dtype=np.int64)
    return ConstraintSet(n=pair_set.n, pairs=pairs, counts=count_arr,
                         num_judges=num_judges)


@dataclass
class SyntheticJudgeSpec:
    """A programmatic stand-in for a human judge.

    kinds:
      metric-threshold: same iff the feature-weight weighted l1 distance
        between the two rows is <= threshold, then each answer is flipped
        independently with flip_probability.
      feature-subset: same iff the unweighted l1 distance restricted to
        features with positive weight is <= threshold (threshold 0 means
        exact agreement on those features), then flipped as above.
      random-flip: ignores features; answers same with probability
        flip_probability, independently per pair.
    """

    kind: str
    feature_weights: np.ndarray
    threshold: float = 0.0
    flip_probability: float = 0.0
    seed: int = 0
    judge_id: str = ""

    KINDS = ("metric-threshold", "feature-subset", "random-flip")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown judge kind {self.kind!r}")
        self.feature_weights = np.asarray(self.feature_weights, dtype=np.float64)
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ValueError("flip_probability must be in [0, 1]")
        if not self.judge_id:
            self.judge_id = f"judge-{self.seed}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "feature_weights": [float(w) for w in self.feature_weights],
            "threshold": float(self.threshold),
            "flip_probability": float(self.flip_probability),
            "seed": int(self.seed),
            "judge_id": self.judge_id,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SyntheticJudgeSpec":
        return cls(
            kind=payload["kind"],
            feature_weights=np.asarray(payload.get("feature_weights", []),
                                       dtype=np.float64),
            threshold=float(payload.get("threshold", 0.0)),
            flip_probability=float(payload.get("flip_probability", 0.0)),
            seed=int(payload.get("seed", 0)),
            judge_id=payload.get("judge_id", ""),
        )


def judge_base_answers(spec: SyntheticJudgeSpec, dataset: Dataset,
                       pairs: np.ndarray) -> np.ndarray:
    """Noise-free same/different answers for canonical pairs, one per row."""
    if spec.kind == "random-flip":
        return np.zeros(len(pairs), dtype=bool)
    if len(spec.feature_weights) != dataset.d:
        raise ValueError("feature-weight length must match dataset features")
    diffs = np.abs(dataset.features[pairs[:, 0]] - dataset.features[pairs[:, 1]])
    if spec.kind == "metric-threshold":
        dist = diffs @ spec.feature_weights
    else:  # feature-subset: unweighted distance over the masked features
        dist = diffs @ (spec.feature_weights > 0).astype(np.float64)
    return dist <= spec.threshold


def simulate_judge(dataset: Dataset, pair_set: PairSet,
                   spec: SyntheticJudgeSpec) -> list[JudgeResponse]:
    """Answer every pair in pair_set (in stored order) as the spec dictates."""
    pairs = pair_set.pairs
    base = judge_base_answers(spec, dataset, pairs)
    rng = np.random.default_rng(spec.seed)
    u = rng.random(len(pairs))
    if spec.kind == "random-flip":
        answers = u < spec.flip_probability
    else:
        answers = base ^ (u < spec.flip_probability)
    return [JudgeResponse(spec.judge_id, int(i), int(j), bool(s))
            for (i, j), s in zip(pairs, answers)]


def write_judgments(path: str, responses) -> None:
    """One JSON object per line: judge_id, i, j, same."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in responses:
            fh.write(json.dumps(
                {"judge_id": r.judge_id, "i": r.i, "j": r.j, "same": r.same}) + "\n")


def read_judgments(path: str) -> list[JudgeResponse]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                out.append(JudgeResponse(str(row["judge_id"]), int(row["i"]),
                                         int(row["j"]), bool(row["same"])))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad judgment line ({exc})")
    return out


def write_constraints(path: str, constraints: ConstraintSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(constraints.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_constraints(path: str) -> ConstraintSet:
    with open(path, encoding="utf-8") as fh:
        return ConstraintSet.from_dict(json.load(fh))
